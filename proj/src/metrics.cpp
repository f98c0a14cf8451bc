#include "hyperpack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hyperpack/io.hpp"
#include "hyperpack/packing.hpp"

namespace hyperpack {

std::optional<double> simplex_optimum(Index n, Index dim) {
  if (n < 2) throw InvalidArgument("need at least 2 points");
  if (dim < 2) throw InvalidArgument("dimension must be at least 2");
  if (n > dim + 1) return std::nullopt;
  return static_cast<double>(n) / static_cast<double>(n - 1);
}

std::optional<double> known_optima_lookup(Index n, Index dim) {
  if (const auto simplex = simplex_optimum(n, dim)) return simplex;
  if (dim == 3 && n == 6) return 1.0;                      // octahedron
  if (dim == 3 && n == 12) return 1.0 - 1.0 / std::sqrt(5.0);  // icosahedron
  return std::nullopt;
}

PackingReport packing_report(const EmbeddingSet& refs, const Gallery* gallery) {
  PackingReport report;
  report.n = refs.count();
  report.dim = refs.dim();
  if (refs.count() < 2) throw TooFewPoints("report needs at least 2 points");

  const Index n = refs.count();
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      dists.push_back(
          cosine_distance(refs.points().row(i), refs.points().row(j)));

  double sum = 0.0;
  for (const double d : dists) sum += d;
  report.mean_dist = sum / static_cast<double>(dists.size());
  report.min_dist = *std::min_element(dists.begin(), dists.end());

  // Nearest-rank percentile: the smallest value with at least 5% of the
  // distribution at or below it.
  std::sort(dists.begin(), dists.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.05 * static_cast<double>(dists.size())));
  report.p5_dist = dists[std::max<std::size_t>(rank, 1) - 1];

  if (gallery != nullptr) {
    std::vector<Index> rows(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < rows.size(); ++i)
      rows[i] = static_cast<Index>(i);
    report.mean_nearest_gallery =
        regularization_term(refs.points(), *gallery, rows).value;
  }

  report.simplex_bound = simplex_optimum(refs.count(), refs.dim());
  report.known_optimum = known_optima_lookup(refs.count(), refs.dim());
  if (report.known_optimum && *report.known_optimum > 0.0)
    report.relative_gap =
        (*report.known_optimum - report.min_dist) / *report.known_optimum;
  return report;
}

std::string report_to_json(const PackingReport& report) {
  nlohmann::json doc = {
      {"n", report.n},
      {"dim", report.dim},
      {"min_dist", report.min_dist},
      {"mean_dist", report.mean_dist},
      {"p5_dist", report.p5_dist},
  };
  if (report.mean_nearest_gallery)
    doc["mean_nearest_gallery"] = *report.mean_nearest_gallery;
  if (report.simplex_bound) doc["simplex_bound"] = *report.simplex_bound;
  if (report.known_optimum) doc["known_optimum"] = *report.known_optimum;
  if (report.relative_gap) doc["relative_gap"] = *report.relative_gap;
  return doc.dump(2);
}

std::vector<RunSummary> compare_runs(
    const std::vector<std::string>& trace_paths) {
  std::vector<RunSummary> rows;
  rows.reserve(trace_paths.size());
  for (const std::string& path : trace_paths) {
    const std::vector<TraceRecord> trace = read_trace(path);
    RunSummary row;
    row.path = path;
    row.label = std::filesystem::path(path).filename().string();
    row.iterations = static_cast<long>(trace.size());
    row.final_min_dist = trace.back().min_distance;
    row.final_reg = trace.back().reg_value;
    for (const TraceRecord& rec : trace) row.total_ms += rec.wall_time_ms;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RunSummary& a, const RunSummary& b) {
                     return a.label < b.label;
                   });
  return rows;
}

std::string comparison_table(const std::vector<RunSummary>& rows) {
  std::size_t label_width = 5;
  for (const RunSummary& row : rows)
    label_width = std::max(label_width, row.label.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(label_width) + 2) << "trace"
      << std::right << std::setw(10) << "iters" << std::setw(14) << "min_dist"
      << std::setw(14) << "reg" << std::setw(12) << "total_ms" << '\n';
  for (const RunSummary& row : rows) {
    out << std::left << std::setw(static_cast<int>(label_width) + 2)
        << row.label << std::right << std::setw(10) << row.iterations
        << std::setw(14) << std::fixed << std::setprecision(6)
        << row.final_min_dist << std::setw(14) << row.final_reg
        << std::setw(12) << std::setprecision(1) << row.total_ms << '\n';
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
  }
  return std::move(out).str();
}

std::string comparison_to_json(const std::vector<RunSummary>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const RunSummary& row : rows) {
    doc.push_back({{"trace", row.label},
                   {"path", row.path},
                   {"iterations", row.iterations},
                   {"final_min_dist", row.final_min_dist},
                   {"final_reg", row.final_reg},
                   {"total_ms", row.total_ms}});
  }
  return doc.dump(2);
}

}  // namespace hyperpack
