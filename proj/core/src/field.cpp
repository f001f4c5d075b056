#include "singdiff/field.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "singdiff/errors.hpp"
#include "singdiff/rng.hpp"

namespace singdiff {

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw Error(ErrorCode::InvalidParameter, "grid resolution must be >= 2 per axis");
  if (!(extent[0] > 0.0 && extent[1] > 0.0) || !std::isfinite(extent[0]) || !std::isfinite(extent[1])) {
    throw Error(ErrorCode::InvalidParameter, "grid extent must be positive");
  }
  if (!std::isfinite(origin[0]) || !std::isfinite(origin[1])) {
    throw Error(ErrorCode::InvalidParameter, "grid origin must be finite");
  }
  if (size() > max_nodes) {
    throw Error(ErrorCode::GridTooLarge, std::to_string(size()) + " nodes exceed the cap of " +
                                             std::to_string(max_nodes));
  }
}

bool GridSpec::contains(const Point2& x) const {
  // Half-ulp slack so nodes on the far edge count as inside.
  const double tx = 1e-12 * extent[0];
  const double ty = 1e-12 * extent[1];
  return x[0] >= origin[0] - tx && x[0] <= origin[0] + extent[0] + tx && x[1] >= origin[1] - ty &&
         x[1] <= origin[1] + extent[1] + ty;
}

Eigen::MatrixXd build_covariance(const KernelParams& params, const GridSpec& grid) {
  params.validate();
  grid.validate();
  const int nx = grid.nx;
  const int ny = grid.ny;
  const double hx = grid.hx();
  const double hy = grid.hy();
  const bool square_cells = hx == hy;

  // table(di, dj) = covariance at displacement (di*hx, dj*hy)
  std::vector<double> table(static_cast<std::size_t>(nx) * ny, 0.0);
  std::vector<char> done(table.size(), 0);
  auto slot = [nx](int di, int dj) { return static_cast<std::size_t>(dj) * nx + di; };
  for (int dj = 0; dj < ny; ++dj) {
    for (int di = 0; di < nx; ++di) {
      if (done[slot(di, dj)]) continue;
      const double value = field_covariance(params, std::hypot(di * hx, dj * hy));
      table[slot(di, dj)] = value;
      done[slot(di, dj)] = 1;
      if (square_cells && dj < nx && di < ny) {
        table[slot(dj, di)] = value;
        done[slot(dj, di)] = 1;
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd cov(n, n);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto row = static_cast<Eigen::Index>(grid.index(ix, iy));
      for (int jy = 0; jy < ny; ++jy) {
        for (int jx = 0; jx < nx; ++jx) {
          const auto col = static_cast<Eigen::Index>(grid.index(jx, jy));
          cov(row, col) = table[slot(std::abs(ix - jx), std::abs(iy - jy))];
        }
      }
    }
  }
  return cov;
}

FieldSampler::FieldSampler(KernelParams params, GridSpec grid, double jitter_scale,
                           double psd_tol_scale)
    : params_(std::move(params)), grid_(grid) {
  covariance_ = build_covariance(params_, grid_);
  const auto n = covariance_.rows();
  const double trace = covariance_.trace();
  if (trace == 0.0) {
    // n = 1: X_1 is identically zero.
    zero_ = true;
    factor_ = Eigen::MatrixXd::Zero(n, n);
    return;
  }
  jitter_ = jitter_scale * trace / static_cast<double>(n);
  covariance_.diagonal().array() += jitter_;

  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
    triangular_ = true;
    return;
  }
  // Cholesky rejected the matrix; fall back to a symmetric square root with
  // eigenvalues clipped at zero, provided the negative part is roundoff.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance_);
  const double smallest = eig.eigenvalues().minCoeff();
  const double psd_tol = psd_tol_scale * trace / static_cast<double>(n);
  if (smallest < -psd_tol) {
    throw Error(ErrorCode::CovarianceNotPSD,
                "smallest eigenvalue " + std::to_string(smallest) + " below -psd_tol");
  }
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = eig.eigenvectors() * root.asDiagonal();
}

GridField FieldSampler::sample(std::uint64_t seed, std::uint64_t sample_index) const {
  GridField field;
  field.grid = grid_;
  field.params = params_;
  field.seed = seed;
  field.variance = params_.field_variance();
  const auto n = factor_.rows();
  if (zero_) {
    field.values.assign(static_cast<std::size_t>(n), 0.0);
    return field;
  }
  Stream stream(derive_stream(seed, "field", sample_index));
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi[i] = stream.normal();
  Eigen::VectorXd values;
  if (triangular_) {
    values = factor_.triangularView<Eigen::Lower>() * xi;
  } else {
    values = factor_ * xi;
  }
  field.values.assign(values.data(), values.data() + n);
  return field;
}

GridField sample_field(const KernelParams& params, const GridSpec& grid, std::uint64_t seed) {
  return FieldSampler(params, grid).sample(seed, 0);
}

namespace {

struct CellCoords {
  int ix;
  int iy;
  double fx;
  double fy;
};

CellCoords locate(const GridSpec& grid, const Point2& x) {
  if (!grid.contains(x)) {
    throw Error(ErrorCode::OutOfDomain, "point (" + std::to_string(x[0]) + ", " +
                                            std::to_string(x[1]) + ") outside the grid box");
  }
  double ux = (x[0] - grid.origin[0]) / grid.hx();
  double uy = (x[1] - grid.origin[1]) / grid.hy();
  // snap coordinates that are nodes up to roundoff
  if (std::fabs(ux - std::round(ux)) < 1e-9) ux = std::round(ux);
  if (std::fabs(uy - std::round(uy)) < 1e-9) uy = std::round(uy);
  int ix = static_cast<int>(std::floor(ux));
  int iy = static_cast<int>(std::floor(uy));
  ix = std::clamp(ix, 0, grid.nx - 2);
  iy = std::clamp(iy, 0, grid.ny - 2);
  return {ix, iy, std::clamp(ux - ix, 0.0, 1.0), std::clamp(uy - iy, 0.0, 1.0)};
}

}  // namespace

double evaluate_field(const GridField& field, const Point2& x) {
  Point2 unused;
  return evaluate_field(field, x, unused);
}

double evaluate_field(const GridField& field, const Point2& x, Point2& gradient) {
  const GridSpec& g = field.grid;
  const CellCoords c = locate(g, x);
  const double v00 = field.values[g.index(c.ix, c.iy)];
  const double v10 = field.values[g.index(c.ix + 1, c.iy)];
  const double v01 = field.values[g.index(c.ix, c.iy + 1)];
  const double v11 = field.values[g.index(c.ix + 1, c.iy + 1)];
  // Weighted form is exact at fractional coordinates 0 and 1.
  const double bottom = (1.0 - c.fx) * v00 + c.fx * v10;
  const double top = (1.0 - c.fx) * v01 + c.fx * v11;
  const double value = (1.0 - c.fy) * bottom + c.fy * top;
  gradient[0] = ((1.0 - c.fy) * (v10 - v00) + c.fy * (v11 - v01)) / g.hx();
  gradient[1] = ((1.0 - c.fx) * (v01 - v00) + c.fx * (v11 - v10)) / g.hy();
  return value;
}

void write_field_csv(const GridField& field, std::ostream& out) {
  const GridSpec& g = field.grid;
  out << "ix,iy,x,y,value\n";
  char buf[160];
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const Point2 p = g.node(ix, iy);
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", ix, iy, p[0], p[1],
                    field.values[g.index(ix, iy)]);
      out << buf;
    }
  }
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

std::uint64_t get_le(std::istream& in, int width) {
  unsigned char bytes[8] = {};
  in.read(reinterpret_cast<char*>(bytes), width);
  if (!in) throw Error(ErrorCode::ParseError, "truncated field dump");
  std::uint64_t v = 0;
  for (int i = width - 1; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace

void write_field_binary(const GridField& field, std::ostream& out) {
  out.write("GFLD", 4);
  put_u32(out, kFieldDumpVersion);
  put_u32(out, static_cast<std::uint32_t>(field.grid.nx));
  put_u32(out, static_cast<std::uint32_t>(field.grid.ny));
  const char reserved[16] = {};
  out.write(reserved, sizeof reserved);
  for (const double v : field.values) put_f64(out, v);
}

FieldDump read_field_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "GFLD", 4) != 0) {
    throw Error(ErrorCode::ParseError, "field dump: bad magic");
  }
  FieldDump dump;
  dump.version = static_cast<std::uint32_t>(get_le(in, 4));
  dump.nx = static_cast<int>(get_le(in, 4));
  dump.ny = static_cast<int>(get_le(in, 4));
  char reserved[16];
  in.read(reserved, sizeof reserved);
  if (!in) throw Error(ErrorCode::ParseError, "field dump: truncated header");
  const auto count = static_cast<std::size_t>(dump.nx) * static_cast<std::size_t>(dump.ny);
  dump.values.resize(count);
  for (auto& v : dump.values) v = std::bit_cast<double>(get_le(in, 8));
  return dump;
}

}  // namespace singdiff
