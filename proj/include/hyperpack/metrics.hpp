#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyperpack/gallery.hpp"
#include "hyperpack/sphere.hpp"

namespace hyperpack {

// Summary of how well a point set is spread, plus bounds to judge it
// against where they are known.
struct PackingReport {
  Index n = 0;
  Index dim = 0;
  double min_dist = 0.0;
  double mean_dist = 0.0;
  double p5_dist = 0.0;  // 5th percentile, nearest-rank, over all pairs
  std::optional<double> mean_nearest_gallery;
  std::optional<double> simplex_bound;
  std::optional<double> known_optimum;
  std::optional<double> relative_gap;  // (known_optimum - min_dist) / known_optimum
};

PackingReport packing_report(const EmbeddingSet& refs,
                             const Gallery* gallery = nullptr);

std::string report_to_json(const PackingReport& report);

// Best possible min pairwise cosine distance when n points fit a regular
// simplex, i.e. n <= dim + 1: every pair at distance n / (n - 1).
std::optional<double> simplex_optimum(Index n, Index dim);

// Certified optima: the simplex family plus the classical dim-3 solutions
// for 6 points (octahedron) and 12 points (icosahedron). Absent entries
// mean no certificate, not impossibility.
std::optional<double> known_optima_lookup(Index n, Index dim);

// Per-trace-file summary for side-by-side comparison of runs.
struct RunSummary {
  std::string label;  // trace filename
  std::string path;
  long iterations = 0;
  double final_min_dist = 0.0;
  double final_reg = 0.0;
  double total_ms = 0.0;
};

std::vector<RunSummary> compare_runs(const std::vector<std::string>& trace_paths);

std::string comparison_table(const std::vector<RunSummary>& rows);
std::string comparison_to_json(const std::vector<RunSummary>& rows);

}  // namespace hyperpack
