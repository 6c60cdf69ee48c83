#pragma once

#include "qrisk/distortion.hpp"
#include "qrisk/distribution.hpp"
#include "qrisk/risk.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qrisk {

struct JointCell {
  double x;
  double y;
  double probability;
};

/// Finite joint law of (X, Y) with its marginals and the law of X + Y.
class JointTable {
public:
  /// Cells with zero probability are dropped; the rest must be positive and
  /// sum to one within 1e-12. Repeated (x, y) pairs are merged.
  static JointTable from_cells(std::vector<JointCell> cells);
  /// counts[i][j] is the integer weight of (xs[i], ys[j]). Cumulative
  /// probabilities are formed as integer counts over the total, so the
  /// marginals and the sum share exactly the same levels.
  static JointTable from_counts(const std::vector<double>& xs, const std::vector<double>& ys,
                                const std::vector<std::vector<std::uint32_t>>& counts);

  const std::vector<JointCell>& cells() const { return cells_; }
  const Distribution& first() const { return x_; }
  const Distribution& second() const { return y_; }
  const Distribution& sum() const { return sum_; }

private:
  JointTable(std::vector<JointCell> cells, Distribution x, Distribution y, Distribution sum)
      : cells_(std::move(cells)), x_(std::move(x)), y_(std::move(y)), sum_(std::move(sum)) {}

  std::vector<JointCell> cells_;
  Distribution x_, y_, sum_;
};

struct CounterexampleReport {
  MidpointWitness witness;
  double a = 1.0;
  JointTable table;
  double rho_x = 0.0;
  double rho_y = 0.0;
  double rho_sum = 0.0;
  /// rho[X+Y] - rho[X] - rho[Y] from the computed risks.
  double gap = 0.0;
  /// (a + eps/2) (2 D(u) - D(u-eps) - D(u+eps)).
  double gap_identity = 0.0;
  /// Closed forms of the three risks in terms of D.
  double rho_x_identity = 0.0;
  double rho_y_identity = 0.0;
  double rho_sum_identity = 0.0;
  /// The law of X + Y from the joint table matches the expected four-atom
  /// table atom for atom.
  bool sum_matches_table = false;
};

/// Two-atom X and three-atom Y built on the convexity witness (u, eps) so
/// that rho[X+Y] > rho[X] + rho[Y]. Throws NoCounterexampleError for convex d.
CounterexampleReport build_counterexample(const Distortion& d, double a = 1.0);

struct SubadditivityViolation {
  JointTable table;
  /// Index into extra_tables when `extra` is set, else the random trial index.
  std::uint64_t trial = 0;
  bool extra = false;
  double rho_x = 0.0;
  double rho_y = 0.0;
  double rho_sum = 0.0;
  double gap = 0.0;
};

struct SubadditivityReport {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  /// Largest rho[X+Y] - rho[X] - rho[Y] seen (negative when strictly subadditive).
  double max_gap = -std::numeric_limits<double>::infinity();
  double max_abs_gap = 0.0;
  /// Worst violation beyond the slack, if any.
  std::optional<SubadditivityViolation> worst;
};

struct SearchOptions {
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  double slack = 1e-9;
  /// Tables checked before the random ones.
  std::vector<JointTable> extra_tables;
};

/// Random integer-valued joint tables with support in [-10, 10] and at most
/// 8 x 8 atoms; trial i draws from a generator seeded by splitmix64(seed + i).
SubadditivityReport subadditivity_search(const Distortion& d, const SearchOptions& options = {});

/// Random joint table for one trial (exposed for reproduction of a reported
/// violation).
JointTable random_joint_table(std::uint64_t seed, std::uint64_t trial);

struct ComonotoneCheck {
  ExtendedRisk rho_first;
  ExtendedRisk rho_second;
  ExtendedRisk rho_sum;
  double difference = 0.0;
  bool passed = false;
};

ComonotoneCheck comonotone_additivity_check(const Distortion& d, const Distribution& d1, const Distribution& d2,
                                            double tolerance = 1e-9, const RiskOptions& options = {});

} // namespace qrisk
