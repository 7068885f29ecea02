#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "boltzinv/velocity_grid.hpp"

namespace boltzinv {

struct AssemblyOptions {
  // Highest order of the lattice-moment correction near the kernel singularity
  // (0 corrects only the diagonal, 4 is the default).
  int correction_order = 4;
  // Use the 48-fold lattice symmetry when the grid is centred at the bulk velocity.
  bool use_symmetry = true;
  // OpenMP threads for assembly; 0 keeps the runtime default.
  int threads = 0;
  // Lattice sums and exact moments are truncated at this radius (units of sqrt T).
  double moment_radius = 14.0;
};

struct AssemblyStats {
  double seconds = 0;
  std::size_t kernel_rows = 0;       // rows evaluated directly
  std::size_t moment_rows = 0;       // rows with their own moment computation
  bool symmetric_path = false;
};

class DiscreteLinearizedOperator {
 public:
  GridPtr grid;
  FluidState state;
  CollisionModel model;
  std::vector<double> nu;                 // collision frequency at the nodes
  Eigen::MatrixXd K;                      // (K f)_i = sum_j K_ij f_j, symmetric
  std::array<GridFunction, 5> phi;        // discrete-orthonormal null basis
  AssemblyStats stats;

  std::size_t size() const { return nu.size(); }
  GridFunction nu_function() const { return GridFunction(grid, nu); }
};

DiscreteLinearizedOperator assemble(const CollisionModel& m, const FluidState& s, const GridPtr& g,
                                    const AssemblyOptions& opt = {});

// Straightforward serial assembly without symmetry reduction; kept as the
// reference for the parallel kernel.
DiscreteLinearizedOperator assemble_reference(const CollisionModel& m, const FluidState& s,
                                              const GridPtr& g, const AssemblyOptions& opt = {});

// Gram-Schmidt of the sampled invariants in the discrete inner product.
std::array<GridFunction, 5> discrete_null_basis(const FluidState& s, const GridPtr& g);

GridFunction apply_L(const DiscreteLinearizedOperator& op, const GridFunction& f);
GridFunction apply_K(const DiscreteLinearizedOperator& op, const GridFunction& f);
GridFunction project_P(const DiscreteLinearizedOperator& op, const GridFunction& f);
GridFunction project_complement(const DiscreteLinearizedOperator& op, const GridFunction& f);

// Dense symmetric matrix-vector product with a fixed per-row summation order,
// so results do not depend on the thread count.
void symmetric_matvec(const Eigen::MatrixXd& A, std::span<const double> x, std::span<double> y);

// Quintic smoothstep: 0 on (0, r], 1 on [2r, inf).
double chi_cutoff(double s, double r);

struct KSplit {
  Eigen::MatrixXd low;   // (1 - chi) K
  Eigen::MatrixXd high;  // chi K
};
KSplit split_K_chi(const DiscreteLinearizedOperator& op, double r);

// Snapshot: header, nu, then the upper triangle of K row by row.
void save_operator_snapshot(const DiscreteLinearizedOperator& op, const std::string& path);
struct OperatorSnapshot {
  GridHeader header;
  std::vector<double> nu;
  Eigen::MatrixXd K;
};
OperatorSnapshot load_operator_snapshot(const std::string& path);

// Correction stencil weights for the moment-corrected singular rows; exposed for tests.
// Returns the 5-point central-difference stencil of derivative order k (0..4).
const std::array<double, 5>& difference_stencil(int k);

// Exact truncated moments of k1 - k2 around c (multi-indices of total order <= order),
// indexed as (a0*5 + a1)*5 + a2.
std::array<double, 125> kernel_moments_exact(const KernelEvaluator& k, const Vec3& c, int order,
                                             double radius);

}  // namespace boltzinv
