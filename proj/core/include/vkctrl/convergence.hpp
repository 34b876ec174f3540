#pragma once

#include "vkctrl/assembly.hpp"
#include "vkctrl/control.hpp"
#include "vkctrl/manufactured.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vkctrl {

enum class Norm { H2Semi, H1, L2 };

/// Jets of an exact pair (first, second) at a point.
using PairExact = std::function<std::array<Jet4, 2>(Point)>;

/// Pair norm of fieldh - exact: sqrt of the summed squared component norms.
/// H1 is the full norm (value and gradient). Uses the error table unless
/// another table is given.
double error_norm(const Discretization& disc, const PairField& field, const PairExact& exact, Norm norm);
double error_norm(const Discretization& disc, const PairField& field, const PairExact& exact, Norm norm,
                  const ShapeTable& table);

/// ||u_bar - u_h||_{L2(omega)} for a cellwise constant control.
double control_error(const Discretization& disc, const ControlField& u, const std::function<double(Point)>& u_bar);
/// ||u_bar - u_tilde||_{L2(omega)} for a pointwise control given per cell.
double control_error(const Discretization& disc, std::span<const int> cells,
                     const std::function<double(int, Point)>& u_h, const std::function<double(Point)>& u_bar);

/// delta_l = log(e_l / e_{l-1}) / log(h_l / h_{l-1}); entry 0 is empty, and
/// entries touching a nonpositive or non-finite error are empty as well.
std::vector<std::optional<double>> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

enum class ErrorColumn {
  StateEnergy,
  AdjointEnergy,
  Control,
  PostProcessedControl,
  CentroidControl,  // ||u_h - P_h u_bar||
  StateH1,
  StateL2,
  AdjointH1,
  AdjointL2,
};
inline constexpr int kNumErrorColumns = 9;
std::string column_name(ErrorColumn c);

struct ErrorRecord {
  int level = 0;
  int n_free = 0;
  double h = 0.0;
  double h_over_h0 = 0.0;
  std::array<double, kNumErrorColumns> errors{};
  int outer_iterations = 0;
  double cost = 0.0;

  double operator[](ErrorColumn c) const { return errors[static_cast<int>(c)]; }
  double& operator[](ErrorColumn c) { return errors[static_cast<int>(c)]; }
};

class EocTable {
 public:
  void add(ErrorRecord r);
  const std::vector<ErrorRecord>& records() const { return records_; }
  std::vector<double> errors(ErrorColumn c) const;
  std::vector<std::optional<double>> rates(ErrorColumn c) const;

 private:
  std::vector<ErrorRecord> records_;
};

/// All error columns of a converged solution against the case's exact fields.
ErrorRecord compute_errors(const ControlProblem& problem, const OcpSolution& sol, const CaseSpec& spec);

struct StudyOptions {
  int level_min = 1;
  int level_max = 3;
  OmegaSpec omega;
  std::optional<Bounds> bounds;  // overrides the case bounds
  int quad_assembly = 5;
  int quad_error = 7;
  PdasOptions pdas;
  /// Called after each level with its record.
  std::function<void(const ErrorRecord&)> progress;

  void validate() const;
};

class StudyFailure : public std::runtime_error {
 public:
  StudyFailure(int level, const std::string& what)
      : std::runtime_error("level " + std::to_string(level) + ": " + what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

/// Solves each level, passing the prolongated previous solution forward as
/// the initial guess. Solver failures are rethrown with the level attached.
EocTable run_study(const CaseSpec& spec, const StudyOptions& opts);

/// State of a coarse solution represented exactly on a nested finer mesh.
PairField prolongate(const Discretization& coarse, const PairField& field, const Discretization& fine);
/// Control of the parent cell, for every cell of the fine omega.
ControlField prolongate(const RectMesh& coarse, const ControlField& u, const RectMesh& fine,
                        std::vector<int> fine_cells);

/// Tables with the layout N, h_over_h0, then error and eoc per column.
/// The control table holds energy and control columns; the state table
/// holds H1 and L2 columns.
std::vector<ErrorColumn> control_table_columns();
std::vector<ErrorColumn> state_table_columns();
void write_csv(std::ostream& out, const EocTable& table, const std::vector<ErrorColumn>& columns);
void write_markdown(std::ostream& out, const EocTable& table, const std::vector<ErrorColumn>& columns);
/// Two columns: h and error.
void write_dat(std::ostream& out, const EocTable& table, ErrorColumn column);

/// 8 significant digits, shortest of fixed/scientific.
std::string format_number(double v);

}  // namespace vkctrl
