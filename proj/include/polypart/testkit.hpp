#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polypart/milp.hpp"
#include "polypart/model.hpp"
#include "polypart/simplex.hpp"

namespace polypart::testkit {

enum class OracleMethod { dense_grid, binary_enumeration, vertex_enumeration };

const char* to_string(OracleMethod m);

struct OracleResult {
  bool feasible = false;
  double optimum = kInf;
  std::vector<double> argmin;
  OracleMethod method = OracleMethod::dense_grid;
  double grid_spacing = 0.0;   // finest spacing used, dense_grid only
  long long evaluations = 0;   // points or vertices examined
};

/// Exhaustive vertex enumeration for an LP with finite column bounds.
/// Exponential; meant for <= 8 columns.
OracleResult oracle_lp_vertices(const LinearProgram& lp, double feas_tol = 1e-9);

/// Solves the LP for every assignment of the integer columns.
/// Callback cuts are ignored. At most 20 integer columns.
OracleResult oracle_milp_enumerate(const MilpProblem& p);

struct GridOptions {
  int grid_per_dim = 41;
  int refinements = 2;
  double feas_tol = 2e-6;
};

/// Binary enumeration times a dense grid over the continuous originals,
/// followed by `refinements` shrinking grids around the best cell.
/// At most 4 continuous originals and 10 binaries.
OracleResult oracle_minlp(const Model& model, const GridOptions& opt = {});
OracleResult oracle_minlp_serial(const Model& model, const GridOptions& opt = {});

/// Dense grid points (over continuous originals, all binary assignments)
/// that are feasible within feas_tol and have objective <= cutoff.
std::vector<std::vector<double>> feasible_samples(const Model& model, int grid_per_dim, double cutoff,
                                                  double feas_tol = 2e-6);

struct InstanceShape {
  int continuous = 2;
  int binaries = 0;
  int bilinear = 1;
  int quadratic = 0;     // x_i^2 terms
  int higher = 0;        // degree 3-4 products
  int constraints = 1;
  double box = 4.0;      // variables drawn in boxes within [-box, box]
  bool nonnegative = false;
};

/// Random multilinear instance; every constraint holds at a sampled anchor
/// point, which is stored as a feasible point.
struct GeneratedInstance {
  RawModel raw;
  Model model;
  std::vector<double> anchor;  // over all model variables
};

GeneratedInstance gen_random_instance(std::uint64_t seed, const InstanceShape& shape);

/// Random bounded LP with n columns and m rows.
LinearProgram gen_random_lp(std::uint64_t seed, int n, int m);

/// Random MILP: `binaries` integer columns followed by `continuous` ones.
MilpProblem gen_random_milp(std::uint64_t seed, int binaries, int continuous, int rows);

}  // namespace polypart::testkit
