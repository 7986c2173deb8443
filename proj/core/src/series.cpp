#include "dampwave/series.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "dampwave/error.hpp"

namespace dampwave {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "NaN" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw DomainError("bad number '" + s + "' in series CSV");
    return v;
  } catch (const std::invalid_argument&) {
    throw DomainError("bad number '" + s + "' in series CSV");
  } catch (const std::out_of_range&) {
    return s.front() == '-' ? -std::numeric_limits<double>::infinity() : 0.0;
  }
}

}  // namespace

const std::vector<double>& NormSeries::track(const std::string& name) const {
  const auto it = tracks.find(name);
  if (it == tracks.end()) throw DomainError("series has no track '" + name + "'");
  return it->second;
}

void NormSeries::append(double t, double Lambda, const std::map<std::string, double>& values) {
  const std::size_t before = times.size();
  times.push_back(t);
  lambda_big.push_back(Lambda);
  for (const auto& [name, v] : values) {
    auto& tr = tracks[name];
    tr.resize(before, std::numeric_limits<double>::quiet_NaN());
    tr.push_back(v);
  }
  for (auto& [name, tr] : tracks) tr.resize(before + 1, std::numeric_limits<double>::quiet_NaN());
}

void NormSeries::check() const {
  if (lambda_big.size() != times.size()) throw DomainError("series: Lambda and time lengths differ");
  for (const auto& [name, tr] : tracks) {
    if (tr.size() != times.size()) throw DomainError("series: track '" + name + "' has wrong length");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw DomainError("series: times must increase strictly");
    if (!(lambda_big[k] > lambda_big[k - 1])) throw DomainError("series: Lambda must increase strictly");
  }
}

std::string to_csv(const NormSeries& series, const std::vector<std::string>& column_order) {
  std::vector<std::string> cols;
  for (const auto& c : column_order) {
    if (series.has(c)) cols.push_back(c);
  }
  for (const auto& [name, tr] : series.tracks) {
    bool listed = false;
    for (const auto& c : cols) listed = listed || c == name;
    if (!listed) cols.push_back(name);
  }
  std::ostringstream os;
  os.precision(17);
  os << "t,Lambda_t";
  for (const auto& c : cols) os << ',' << c;
  os << '\n';
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << series.times[k] << ',' << series.lambda_big[k];
    for (const auto& c : cols) os << ',' << series.tracks.at(c)[k];
    os << '\n';
  }
  return os.str();
}

NormSeries series_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw DomainError("series CSV is empty");
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "t" || header[1] != "Lambda_t") {
    throw DomainError("series CSV must start with columns t,Lambda_t");
  }
  NormSeries s;
  for (std::size_t c = 2; c < header.size(); ++c) s.tracks[header[c]];
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) throw DomainError("series CSV row has wrong field count");
    s.times.push_back(parse_double(fields[0]));
    s.lambda_big.push_back(parse_double(fields[1]));
    for (std::size_t c = 2; c < header.size(); ++c) s.tracks[header[c]].push_back(parse_double(fields[c]));
  }
  return s;
}

}  // namespace dampwave
