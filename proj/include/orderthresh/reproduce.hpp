#pragma once

// Regeneration of the published simulation tables and density figures.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orderthresh/montecarlo.hpp"

namespace orderthresh {

struct ReproduceOptions {
  std::uint64_t replicates = 0;  ///< 0 = the replicate count of the published study
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Row-labelled numeric table; CSV has a leading "row" column.
struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<double>> values;

  std::string to_csv() const;
};

/// Table names accepted by reproduce_table ("table1" ... "table11").
std::vector<std::string> table_names();
/// Figure names accepted by reproduce_figure ("fig1", "fig2").
std::vector<std::string> figure_names();

std::uint64_t default_replicates(const std::string& name);

/// The eight order-threshold columns for dimension m:
/// [log^{1/2} m], [log m], [log^{3/2} m], [m^{1/2}], [m^{2/3}], [m^{3/4}], [m^{7/8}], m.
/// Entries are floored and clamped to [1, m].
std::vector<std::size_t> order_k_grid(std::size_t m);

/// Simulated table with the published layout. Throws DomainError for an
/// unknown name.
ResultTable reproduce_table(const std::string& name, const ReproduceOptions& options);

/// The published values in the same layout as reproduce_table.
ResultTable published_table(const std::string& name);

/// Density curves for a figure.
std::vector<DensityCurve> reproduce_figure(const std::string& name, const ReproduceOptions& options);

}  // namespace orderthresh
