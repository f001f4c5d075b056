#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "singdiff/kernels.hpp"

namespace singdiff {

using Point2 = std::array<double, 2>;

inline constexpr std::size_t kDefaultMaxGridNodes = 4096;

/// Rectangular lattice of nx * ny nodes spanning [origin, origin + extent].
struct GridSpec {
  Point2 origin{0.0, 0.0};
  Point2 extent{1.0, 1.0};
  int nx = 2;
  int ny = 2;
  std::size_t max_nodes = kDefaultMaxGridNodes;

  void validate() const;
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  double hx() const { return extent[0] / (nx - 1); }
  double hy() const { return extent[1] / (ny - 1); }
  /// Row-major node index: ix varies fastest.
  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }
  Point2 node(int ix, int iy) const { return {origin[0] + ix * hx(), origin[1] + iy * hy()}; }
  bool contains(const Point2& x) const;
};

/// One realization of X_n on a grid. Immutable once built.
struct GridField {
  GridSpec grid;
  std::vector<double> values;
  /// E[X_n(z)^2] = ln c_n, the normalization used by the Liouville density.
  double variance = 0.0;
  KernelParams params;
  std::uint64_t seed = 0;
};

/// Dense covariance of X_n at the grid nodes. Entries depend only on the node
/// displacement, so each distinct displacement is integrated once.
Eigen::MatrixXd build_covariance(const KernelParams& params, const GridSpec& grid);

/// Factorization of the jittered covariance reused across many draws.
class FieldSampler {
 public:
  /// Jitter added to the diagonal is jitter_scale * trace / size.
  FieldSampler(KernelParams params, GridSpec grid, double jitter_scale = 1e-10,
               double psd_tol_scale = 1e-8);

  /// The sample_index-th draw of the ensemble keyed by seed; independent of
  /// the order in which draws are requested.
  GridField sample(std::uint64_t seed, std::uint64_t sample_index = 0) const;

  /// Covariance the sampler actually reproduces (the jittered matrix).
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& factor() const { return factor_; }
  const GridSpec& grid() const { return grid_; }
  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }

 private:
  KernelParams params_;
  GridSpec grid_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
  bool zero_ = false;
  bool triangular_ = false;
};

/// Single draw: FieldSampler(params, grid).sample(seed).
GridField sample_field(const KernelParams& params, const GridSpec& grid, std::uint64_t seed);

/// Bilinear interpolation of nodal values; exact at nodes. Throws OutOfDomain
/// outside the grid box.
double evaluate_field(const GridField& field, const Point2& x);

/// Value and gradient of the bilinear interpolant inside the cell holding x.
double evaluate_field(const GridField& field, const Point2& x, Point2& gradient);

/// CSV dump `ix,iy,x,y,value`.
void write_field_csv(const GridField& field, std::ostream& out);

/// Binary dump: 32-byte header ("GFLD", u32 version, u32 nx, u32 ny, 16
/// reserved zero bytes) then nx*ny little-endian doubles, row-major.
void write_field_binary(const GridField& field, std::ostream& out);

struct FieldDump {
  std::uint32_t version = 0;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;
};

FieldDump read_field_binary(std::istream& in);

inline constexpr std::uint32_t kFieldDumpVersion = 1;

}  // namespace singdiff
