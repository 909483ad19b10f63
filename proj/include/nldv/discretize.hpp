#pragma once

#include "nldv/kernel_field.hpp"
#include "nldv/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nldv {

/// Cell-centred lattice on the bounding box of a domain Omega. Nodes inside
/// Omega are the unknowns; everything outside is held at zero.
class LatticeDomain {
public:
    enum class Shape { Interval, Box, Ball, SignedDistance };
    using Sdf = std::function<double(const Vec&)>;

    /// (a, b) split into round((b - a)/mesh) cells, so the cells tile it.
    static LatticeDomain interval(double a, double b, double mesh);
    /// Axis-aligned box; each axis is split into whole cells (spacing per
    /// axis rounded from `mesh`).
    static LatticeDomain box(const Vec& lo, const Vec& hi, double mesh);
    static LatticeDomain ball(const Vec& center, double radius, double mesh);
    /// {sdf < 0}, which must lie inside [lo, hi].
    static LatticeDomain signed_distance(Sdf sdf, const Vec& lo, const Vec& hi, double mesh);

    /// Image under x -> x0 + lambda (x - x0), lattice included.
    LatticeDomain scaled(double lambda, const Vec& x0) const;

    Shape shape() const { return shape_; }
    int dim() const { return static_cast<int>(lo_.size()); }
    const Vec& lo() const { return lo_; }
    const Vec& hi() const { return hi_; }
    const Vec& spacing() const { return spacing_; }
    const std::vector<int>& counts() const { return counts_; }
    /// Largest spacing.
    double mesh() const { return spacing_.maxCoeff(); }
    double cell_volume() const { return spacing_.prod(); }

    /// Interior nodes, in lexicographic lattice order (first axis fastest).
    const std::vector<Vec>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    /// Lattice multi-index of each interior node.
    const std::vector<std::array<int, kMaxDim>>& indices() const { return indices_; }
    /// Interior position of a lattice multi-index, or -1 when outside Omega.
    long interior_index(const std::array<int, kMaxDim>& idx) const;
    /// Full-lattice mask (lexicographic), true on Omega nodes.
    const std::vector<bool>& interior_mask() const { return mask_; }

    bool contains(const Vec& x) const;
    /// Sorted disjoint intervals [a, b] (b may be +inf) of rho > 0 with
    /// x + rho theta outside Omega. x must lie in Omega.
    std::vector<std::pair<double, double>> exterior_intervals(const Vec& x, const Vec& theta) const;

    std::string describe() const;

private:
    LatticeDomain() = default;
    void build();

    Shape shape_ = Shape::Box;
    Vec lo_, hi_, spacing_;
    std::vector<int> counts_;
    // shape parameters
    Vec dom_lo_, dom_hi_, center_;
    double radius_ = 0.0;
    Sdf sdf_;

    std::vector<Vec> nodes_;
    std::vector<std::array<int, kMaxDim>> indices_;
    std::vector<bool> mask_;
    std::vector<long> lookup_;
};

/// Values on the interior nodes of a lattice; zero outside Omega.
struct GridFunction {
    std::shared_ptr<const LatticeDomain> lattice;
    Eigen::VectorXd values;

    GridFunction() = default;
    GridFunction(std::shared_ptr<const LatticeDomain> l, Eigen::VectorXd v);

    static GridFunction sample(std::shared_ptr<const LatticeDomain> l, const std::function<double(const Vec&)>& f);

    /// CSV with columns index, x0[, x1, x2], value.
    void write_csv(const std::filesystem::path& path) const;
    /// Lattice metadata (shape, box, spacing, counts, node count).
    void write_metadata(const std::filesystem::path& path) const;
};

struct AssemblyOptions {
    /// Directions for the exterior and drift integrals: angles in 2D, polar
    /// nodes in 3D (times twice as many azimuths). Unused in 1D.
    int directions = 128;
    /// Gauss nodes per radial panel of the exterior integrals.
    int radial_nodes = 12;
    /// Add the second-order self-cell term to the nearest-neighbour weights.
    bool self_cell_correction = true;
    std::size_t max_nodes = 8000;
};

/// Discrete L_K + B(., h) + V on the interior nodes of a lattice.
///
/// With pair weights W_ij ~ K(x_i, x_j) |cell|, exterior masses
/// e_i = int_{Omega^c} K(x_i, y) dy and drift exterior terms
/// g_i = int_{Omega^c} (h(y) - h_i) K(x_i, y) dy, row i reads
///   sum_j W_ij (1 + (h_j - h_i)/2) (u_j - u_i) - (e_i + g_i/2) u_i + V_i u_i.
/// For h = 0 the matrix is symmetric, and -|cell| u^T M v is exactly the
/// double-sum form of int B(u, v).
struct AssembledOperator {
    std::shared_ptr<const LatticeDomain> lattice;
    std::shared_ptr<const KernelSpec> kernel;
    Eigen::MatrixXd weights;        ///< W, symmetric, zero diagonal
    Eigen::VectorXd exterior_mass;  ///< e
    Eigen::VectorXd drift;          ///< h at the nodes
    Eigen::VectorXd drift_exterior; ///< g
    Eigen::VectorXd potential;      ///< V
    double drift_far_value = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(exterior_mass.size()); }
    bool has_drift() const;
    /// osc(h) over the nodes and the far value.
    double drift_oscillation() const;

    /// Dense matrix M.
    Eigen::MatrixXd matrix() const;
    /// M u without forming M.
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    /// Same operator with another potential.
    AssembledOperator with_potential(Eigen::VectorXd V) const;
};

AssembledOperator assemble(std::shared_ptr<const LatticeDomain> lattice, const KernelSpec& spec,
                           const SmoothFunction& h, const Eigen::VectorXd& V, const AssemblyOptions& opts = {});
/// h = 0, V = 0.
AssembledOperator assemble(std::shared_ptr<const LatticeDomain> lattice, const KernelSpec& spec,
                           const AssemblyOptions& opts = {});

/// Discrete int B(u, v) dx = |cell| [1/2 sum_ij W_ij (u_i-u_j)(v_i-v_j) + sum_i e_i u_i v_i].
double dirichlet_form(const AssembledOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
/// Discrete int B(f, h) dx = -int f L_K h = |cell| [1/2 sum_ij W_ij (f_i-f_j)(h_i-h_j) - sum_i f_i g_i].
double drift_form(const AssembledOperator& op, const Eigen::VectorXd& f);
/// Pointwise discrete B(u, v)_i = 1/2 sum_j W_ij (u_j-u_i)(v_j-v_i) + 1/2 e_i u_i v_i
/// (the last term is the exterior, where u = v = 0).
Eigen::VectorXd carre_du_champ(const AssembledOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
/// Discrete L_K h at the nodes: sum_j W_ij (h_j - h_i) + g_i.
Eigen::VectorXd drift_laplacian(const AssembledOperator& op);

/// Discrete H^s_K seminorm squared: sum over node pairs in Q of
/// (u_i - u_j)^2 W_ij |cell| plus, for pairs with one point outside Omega,
/// 2 |cell| sum_i u_i^2 e_i. The default region Q = R^{2N} \ (Omega^c)^2
/// includes both; `interior_only` restricts to Omega x Omega.
double seminorm_HsK(const AssembledOperator& op, const Eigen::VectorXd& u, bool interior_only = false);
double seminorm_HsK(const GridFunction& u, const KernelSpec& spec, bool interior_only = false,
                    const AssemblyOptions& opts = {});

struct DirichletSolution {
    GridFunction u;
    double residual = 0.0;
    double condition_estimate = 0.0;
};

/// Solves (M - C) u = rhs. Throws SolverError when the system is singular or
/// its reciprocal condition estimate falls below `rcond_floor`.
DirichletSolution dirichlet_solve(const AssembledOperator& op, double C, const Eigen::VectorXd& rhs,
                                  double rcond_floor = 1e-13);

/// Smallest C for which the symmetric part of M - C is negative definite:
/// the largest eigenvalue of (M + M^T)/2.
double coercivity_shift(const AssembledOperator& op);

}  // namespace nldv
