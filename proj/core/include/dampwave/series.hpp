#pragma once

#include <map>
#include <string>
#include <vector>

namespace dampwave {

/// Time-stamped norm tracks from one run.
struct NormSeries {
  std::vector<double> times;
  std::vector<double> lambda_big;  // Lambda(t) at each time
  std::map<std::string, std::vector<double>> tracks;
  std::map<std::string, std::string> metadata;

  std::size_t size() const noexcept { return times.size(); }
  bool has(const std::string& track) const { return tracks.count(track) != 0; }
  const std::vector<double>& track(const std::string& name) const;

  /// Appends one time with every track value in `values`; tracks absent from
  /// `values` but present in the series get NaN.
  void append(double t, double Lambda, const std::map<std::string, double>& values);

  /// Throws DomainError unless lengths agree and times, Lambda increase strictly.
  void check() const;
};

/// CSV with header "t,Lambda_t,<tracks...>", 17 significant digits.
std::string to_csv(const NormSeries& series, const std::vector<std::string>& column_order = {});
NormSeries series_from_csv(const std::string& text);

}  // namespace dampwave
