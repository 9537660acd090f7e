#include "lifetime_pd/ratings.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lifetime_pd/errors.h"

namespace lifetime_pd {
namespace {

int resolve_default(int default_index, int size) {
  const int k = default_index < 0 ? size - 1 : default_index;
  require(k >= 0 && k < size, ErrorKind::kInvalidArgument,
          "default_index " + std::to_string(default_index) + " out of range");
  return k;
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

}  // namespace

MigrationCounts::MigrationCounts(CountMatrix counts, int default_index,
                                 std::vector<std::string> labels)
    : counts_(std::move(counts)), labels_(std::move(labels)) {
  require(counts_.rows() == counts_.cols(), ErrorKind::kDimensionMismatch,
          "migration counts must be square");
  require(counts_.rows() >= 2, ErrorKind::kInvalidArgument,
          "migration counts need at least two states");
  default_index_ = resolve_default(default_index, size());
  require(labels_.empty() || static_cast<int>(labels_.size()) == size(),
          ErrorKind::kDimensionMismatch, "label count does not match K");
  for (int i = 0; i < size(); ++i) {
    std::int64_t row = 0;
    for (int j = 0; j < size(); ++j) {
      require(counts_(i, j) >= 0, ErrorKind::kInvalidArgument,
              "negative migration count at (" + std::to_string(i) + ", " +
                  std::to_string(j) + ")");
      row += counts_(i, j);
    }
    require(row > 0, ErrorKind::kEmptyCohortRow,
            "row " + std::to_string(i) + " has no obligors");
  }
}

MigrationCounts read_migration_counts_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      labels = split_commas(line);
      break;
    }
  }
  require(!labels.empty(), ErrorKind::kInvalidArgument,
          "counts CSV is missing its header row");
  const int k = static_cast<int>(labels.size());
  CountMatrix counts(k, k);
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    require(row < k, ErrorKind::kDimensionMismatch,
            "counts CSV has more than " + std::to_string(k) + " data rows");
    require(static_cast<int>(cells.size()) == k, ErrorKind::kDimensionMismatch,
            "counts CSV row " + std::to_string(row) + " has " +
                std::to_string(cells.size()) + " cells, expected " +
                std::to_string(k));
    for (int j = 0; j < k; ++j) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(cells[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == cells[j].size() && used > 0, ErrorKind::kInvalidArgument,
              "counts CSV cell '" + cells[j] + "' is not an integer");
      counts(row, j) = v;
    }
    ++row;
  }
  require(row == k, ErrorKind::kDimensionMismatch,
          "counts CSV has " + std::to_string(row) + " data rows, expected " +
              std::to_string(k));
  return MigrationCounts(std::move(counts), -1, std::move(labels));
}

MigrationCounts read_migration_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kInvalidArgument,
          "cannot open counts file " + path.string());
  return read_migration_counts_csv(in);
}

TransitionMatrix::TransitionMatrix(Matrix entries, int default_index)
    : entries_(std::move(entries)) {
  require(entries_.rows() == entries_.cols() && entries_.rows() >= 2,
          ErrorKind::kDimensionMismatch,
          "transition matrix must be square with K >= 2");
  default_index_ = resolve_default(default_index, size());
  for (int i = 0; i < size(); ++i) {
    double row = 0.0;
    for (int j = 0; j < size(); ++j) {
      const double p = entries_(i, j);
      require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
              ErrorKind::kInvalidArgument,
              "transition entry (" + std::to_string(i) + ", " +
                  std::to_string(j) + ") outside [0, 1]");
      row += p;
    }
    require(std::abs(row - 1.0) <= kRowSumTolerance, ErrorKind::kInvalidArgument,
            "transition row " + std::to_string(i) + " does not sum to 1");
  }
  for (int j = 0; j < size(); ++j) {
    require(entries_(default_index_, j) == (j == default_index_ ? 1.0 : 0.0),
            ErrorKind::kNonAbsorbingDefault, "default row is not absorbing");
  }
}

TransitionMatrix TransitionMatrix::identity(int size, int default_index) {
  return TransitionMatrix(Matrix::Identity(size, size), default_index);
}

SensitivityMatrix::SensitivityMatrix(Matrix betas, int default_index)
    : betas_(std::move(betas)) {
  require(betas_.rows() == betas_.cols() && betas_.rows() >= 2,
          ErrorKind::kDimensionMismatch,
          "sensitivity matrix must be square with K >= 2");
  default_index_ = resolve_default(default_index, size());
  require(betas_.allFinite(), ErrorKind::kInvalidArgument,
          "sensitivities must be finite");
  require((betas_.row(default_index_).array() == 0.0).all(),
          ErrorKind::kInvalidArgument, "default row sensitivities must be zero");
}

SensitivityMatrix SensitivityMatrix::zero(int size, int default_index) {
  return SensitivityMatrix(Matrix::Zero(size, size), default_index);
}

SensitivityMatrix SensitivityMatrix::negated() const {
  Matrix b = -betas_;
  b.row(default_index_).setZero();
  return SensitivityMatrix(std::move(b), default_index_);
}

SensitivityMatrix oriented(const SensitivityMatrix& betas,
                           MacroOrientation orientation) {
  return orientation == MacroOrientation::kAsWritten ? betas : betas.negated();
}

void check_compatible(const TransitionMatrix& ttc, const SensitivityMatrix& betas) {
  require(ttc.size() == betas.size(), ErrorKind::kDimensionMismatch,
          "TTC matrix is " + std::to_string(ttc.size()) +
              " states, sensitivities are " + std::to_string(betas.size()));
  require(ttc.default_index() == betas.default_index(),
          ErrorKind::kDimensionMismatch, "default_index differs");
}

TransitionMatrix cohort_estimate(const MigrationCounts& counts,
                                 bool force_absorption) {
  const int k = counts.size();
  const int d = counts.default_index();
  const CountMatrix& n = counts.counts();
  if (!force_absorption) {
    for (int j = 0; j < k; ++j) {
      require(j == d || n(d, j) == 0, ErrorKind::kNonAbsorbingDefault,
              "default row has migrations out of default");
    }
  }
  Matrix p(k, k);
  for (int i = 0; i < k; ++i) {
    const std::int64_t row = n.row(i).sum();
    for (int j = 0; j < k; ++j) {
      p(i, j) = static_cast<double>(n(i, j)) / static_cast<double>(row);
    }
  }
  p.row(d).setZero();
  p(d, d) = 1.0;
  return TransitionMatrix(std::move(p), d);
}

TransitionMatrix logit_overlay(const TransitionMatrix& ttc,
                               const SensitivityMatrix& betas, double m,
                               double exponent_cap) {
  check_compatible(ttc, betas);
  require(std::isfinite(m), ErrorKind::kInvalidArgument, "macro index is not finite");
  const int k = ttc.size();
  const int d = ttc.default_index();
  if (m == 0.0) return ttc;
  Matrix p = ttc.entries();
  for (int i = 0; i < k; ++i) {
    if (i == d) continue;
    if ((betas.betas().row(i).array() == 0.0).all()) continue;
    CompensatedSum sum;
    for (int j = 0; j < k; ++j) {
      const double base = ttc(i, j);
      if (base == 0.0) {
        p(i, j) = 0.0;
        continue;
      }
      const double z = betas(i, j) * m;
      require(std::abs(z) <= exponent_cap, ErrorKind::kOverflowGuard,
              "|beta * m| = " + std::to_string(std::abs(z)) + " at (" +
                  std::to_string(i) + ", " + std::to_string(j) +
                  ") exceeds the exponent cap");
      p(i, j) = base * std::exp(z);
      sum.add(p(i, j));
    }
    const double total = sum.value();
    require(total > 0.0 && std::isfinite(total), ErrorKind::kOverflowGuard,
            "row " + std::to_string(i) + " mass degenerated under the overlay");
    p.row(i) /= total;
  }
  return TransitionMatrix(std::move(p), d);
}

namespace {

// p_iK(m) (beta_iK - sum_j beta_ij p_ij(m)) for each row i.
Vector row_default_slopes(const TransitionMatrix& pit, const SensitivityMatrix& betas) {
  const int k = pit.size();
  const int d = pit.default_index();
  Vector out = Vector::Zero(k);
  for (int i = 0; i < k; ++i) {
    if (i == d) continue;
    const double mean_beta = betas.betas().row(i).dot(pit.entries().row(i));
    out(i) = pit(i, d) * (betas(i, d) - mean_beta);
  }
  return out;
}

}  // namespace

double overlay_default_sensitivity(const TransitionMatrix& ttc,
                                   const SensitivityMatrix& betas,
                                   const RatingDistribution& pi, double m,
                                   double exponent_cap) {
  check_compatible(ttc, betas);
  require(pi.size() == ttc.size(), ErrorKind::kDimensionMismatch,
          "distribution size differs from matrix size");
  const TransitionMatrix pit = logit_overlay(ttc, betas, m, exponent_cap);
  return pi.weights().dot(row_default_slopes(pit, betas));
}

double sensitivity_lower_bound(const TransitionMatrix& ttc,
                               const SensitivityMatrix& betas, double m_lo,
                               double m_hi, double step, double exponent_cap) {
  check_compatible(ttc, betas);
  require(m_lo <= m_hi && step > 0.0, ErrorKind::kInvalidArgument,
          "sensitivity grid needs m_lo <= m_hi and a positive step");
  const int d = ttc.default_index();
  const int n = static_cast<int>(std::floor((m_hi - m_lo) / step + 1e-9));
  double lo = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= n + 1; ++s) {
    const double m = s <= n ? m_lo + s * step : m_hi;
    const Vector slopes =
        row_default_slopes(logit_overlay(ttc, betas, m, exponent_cap), betas);
    for (int i = 0; i < ttc.size(); ++i) {
      if (i != d) lo = std::min(lo, slopes(i));
    }
  }
  return lo;
}

}  // namespace lifetime_pd
