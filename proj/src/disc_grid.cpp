#include "framelab/disc_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "framelab/kernels.hpp"

namespace framelab {

using std::numbers::pi;

DiscGrid DiscGrid::build(int n_r, int n_theta) {
  if (n_r < kMinRings) {
    throw GridError("n_r = " + std::to_string(n_r) + " is below the minimum of " +
                    std::to_string(kMinRings) + " rings");
  }
  if (n_theta < kMinSectors) {
    throw GridError("n_theta = " + std::to_string(n_theta) + " is below the minimum of " +
                    std::to_string(kMinSectors) + " sectors");
  }
  if (n_theta % 2 != 0) {
    throw GridError("n_theta = " + std::to_string(n_theta) + " must be even");
  }

  DiscGrid g;
  g.n_r_ = n_r;
  g.n_theta_ = n_theta;
  g.angular_step_ = 2.0 * pi / n_theta;
  const double h = 1.0 / n_r;
  const double dt = g.angular_step_;

  g.cos_theta_.resize(n_theta);
  g.sin_theta_.resize(n_theta);
  for (int k = 0; k < n_theta; ++k) {
    g.cos_theta_[k] = std::cos(k * dt);
    g.sin_theta_[k] = std::sin(k * dt);
  }

  const std::size_t count = 1 + static_cast<std::size_t>(n_r) * n_theta;
  g.u_.assign(count, 0.0);
  g.v_.assign(count, 0.0);
  g.r_.assign(count, 0.0);
  g.theta_.assign(count, 0.0);
  g.quad_weights_.assign(count, 0.0);

  // Cell areas: center disc of radius h/2, annular sectors of width h around
  // interior rings, and a half-width sector on the boundary ring.
  g.quad_weights_[0] = pi * h * h / 4.0;
  for (int j = 1; j <= n_r; ++j) {
    const double r = j * h;
    const double weight = j < n_r ? j * h * h * dt : (n_r - 0.25) * h * h * dt / 2.0;
    for (int k = 0; k < n_theta; ++k) {
      const std::size_t i = g.index(j, k);
      g.r_[i] = r;
      g.theta_[i] = k * dt;
      g.u_[i] = r * g.cos_theta_[k];
      g.v_[i] = r * g.sin_theta_[k];
      g.quad_weights_[i] = weight;
    }
  }

  g.boundary_nodes_.resize(n_theta);
  g.arc_weights_.assign(n_theta, dt);
  for (int k = 0; k < n_theta; ++k) g.boundary_nodes_[k] = g.index(n_r, k);

  g.assemble_derivative_operators();
  return g;
}

double DiscGrid::mesh_size() const { return std::max(1.0 / n_r_, angular_step_); }

int DiscGrid::ring_of(std::size_t node) const {
  return node == 0 ? 0 : 1 + static_cast<int>((node - 1) / n_theta_);
}

void DiscGrid::assemble_derivative_operators() {
  using Triplet = Eigen::Triplet<double>;
  const double h = radial_step();
  const double inv_2sin = 1.0 / (2.0 * std::sin(angular_step_));
  const std::size_t count = node_count();

  std::vector<Triplet> du, dv;
  du.reserve(count * 8);
  dv.reserve(count * 8);

  // Center: Richardson combination of the linear fits over rings 1 and 2.
  const double fit1 = 4.0 * (2.0 / (n_theta_ * h)) / 3.0;
  const double fit2 = -(1.0 / (n_theta_ * h)) / 3.0;
  for (int k = 0; k < n_theta_; ++k) {
    du.emplace_back(0, index(1, k), fit1 * cos_theta_[k]);
    dv.emplace_back(0, index(1, k), fit1 * sin_theta_[k]);
    du.emplace_back(0, index(2, k), fit2 * cos_theta_[k]);
    dv.emplace_back(0, index(2, k), fit2 * sin_theta_[k]);
  }

  const double c4 = 1.0 / (12.0 * h);
  for (int j = 1; j <= n_r_; ++j) {
    const double inv_r = 1.0 / (j * h);
    for (int k = 0; k < n_theta_; ++k) {
      const int row = static_cast<int>(index(j, k));
      const double c = cos_theta_[k];
      const double s = sin_theta_[k];
      // node at signed radius i along this ray (i = -1: opposite sector)
      const auto along = [&](int i) -> std::size_t {
        if (i == 0) return 0;
        if (i < 0) return index(-i, (k + n_theta_ / 2) % n_theta_);
        return index(i, k);
      };
      // f_r stencil
      auto radial = [&](std::size_t col, double coef) {
        du.emplace_back(row, col, c * coef);
        dv.emplace_back(row, col, s * coef);
      };
      if (j <= n_r_ - 2) {
        radial(along(j - 2), c4);
        radial(along(j - 1), -8.0 * c4);
        radial(along(j + 1), 8.0 * c4);
        radial(along(j + 2), -c4);
      } else if (j < n_r_) {
        radial(along(j - 3), -c4);
        radial(along(j - 2), 6.0 * c4);
        radial(along(j - 1), -18.0 * c4);
        radial(along(j), 10.0 * c4);
        radial(along(j + 1), 3.0 * c4);
      } else {
        radial(along(j - 4), 3.0 * c4);
        radial(along(j - 3), -16.0 * c4);
        radial(along(j - 2), 36.0 * c4);
        radial(along(j - 1), -48.0 * c4);
        radial(along(j), 25.0 * c4);
      }
      // f_theta stencil
      const int next = (k + 1) % n_theta_;
      const int prev = (k + n_theta_ - 1) % n_theta_;
      const double a = inv_r * inv_2sin;
      du.emplace_back(row, index(j, next), -s * a);
      du.emplace_back(row, index(j, prev), s * a);
      dv.emplace_back(row, index(j, next), c * a);
      dv.emplace_back(row, index(j, prev), -c * a);
    }
  }

  du_.resize(count, count);
  dv_.resize(count, count);
  du_.setFromTriplets(du.begin(), du.end());
  dv_.setFromTriplets(dv.begin(), dv.end());
}

Partials cartesian_partials(std::span<const double> f, const DiscGrid& grid) {
  if (f.size() != grid.node_count()) {
    throw GridError("field size " + std::to_string(f.size()) + " does not match grid node count " +
                    std::to_string(grid.node_count()));
  }
  const auto& kt = kernels::table();
  const int n_r = grid.rings();
  const std::size_t n = grid.sectors();
  const double h = grid.radial_step();
  const double inv_2sin = 1.0 / (2.0 * std::sin(grid.angular_step()));
  const auto cos_t = grid.cos_theta();
  const auto sin_t = grid.sin_theta();

  Partials out{ScalarField(f.size()), ScalarField(f.size())};

  {
    // d_m = 2 / (n m h) sum_k (cos, sin)_k f(m h, theta_k) = grad f(0) + O(m^2 h^2)
    double b1u = 0.0, b1v = 0.0, b2u = 0.0, b2v = 0.0;
    const double* ring1 = f.data() + grid.ring_offset(1);
    const double* ring2 = f.data() + grid.ring_offset(2);
    for (std::size_t k = 0; k < n; ++k) {
      b1u += cos_t[k] * ring1[k];
      b1v += sin_t[k] * ring1[k];
      b2u += cos_t[k] * ring2[k];
      b2v += sin_t[k] * ring2[k];
    }
    const double fit1 = 2.0 / (static_cast<double>(n) * h);
    const double fit2 = 1.0 / (static_cast<double>(n) * h);
    out.du[0] = (4.0 * (fit1 * b1u) - fit2 * b2u) / 3.0;
    out.dv[0] = (4.0 * (fit1 * b1v) - fit2 * b2v) / 3.0;
  }

  const double c4 = 1.0 / (12.0 * h);
  std::vector<double> center(n, f[0]);
  std::vector<double> mirror(n);  // ring 1 seen from the opposite side: radius -h
  {
    const double* ring1 = f.data() + grid.ring_offset(1);
    for (std::size_t k = 0; k < n; ++k) mirror[k] = ring1[(k + n / 2) % n];
  }
  const auto ring_at = [&](int j) -> const double* {
    if (j == -1) return mirror.data();
    if (j == 0) return center.data();
    return f.data() + grid.ring_offset(j);
  };
  std::vector<double> f_r(n), tmp(n);
  for (int j = 1; j <= n_r; ++j) {
    const double* here = ring_at(j);
    if (j <= n_r - 2) {
      kt.radial_combination(ring_at(j - 1), here, ring_at(j + 1), -8.0 * c4, 0.0, 8.0 * c4,
                            tmp.data(), n);
      kt.radial_combination(tmp.data(), ring_at(j - 2), ring_at(j + 2), 1.0, c4, -c4, f_r.data(),
                            n);
    } else if (j < n_r) {
      // one ring short of the boundary: shifted fourth-order stencil
      kt.radial_combination(ring_at(j - 3), ring_at(j - 2), ring_at(j - 1), -c4, 6.0 * c4,
                            -18.0 * c4, tmp.data(), n);
      kt.radial_combination(tmp.data(), here, ring_at(j + 1), 1.0, 10.0 * c4, 3.0 * c4,
                            f_r.data(), n);
    } else {
      kt.radial_combination(ring_at(j - 4), ring_at(j - 3), ring_at(j - 2), 3.0 * c4,
                            -16.0 * c4, 36.0 * c4, tmp.data(), n);
      kt.radial_combination(tmp.data(), ring_at(j - 1), here, 1.0, -48.0 * c4, 25.0 * c4,
                            f_r.data(), n);
    }
    const std::size_t off = grid.ring_offset(j);
    kt.ring_gradient(here, f_r.data(), cos_t.data(), sin_t.data(), 1.0 / (j * h), inv_2sin,
                     out.du.data() + off, out.dv.data() + off, n);
  }
  return out;
}

double integrate_disc(std::span<const double> f, const DiscGrid& grid) {
  const auto w = grid.quad_weights();
  return kernels::table().weighted_sum(w.data(), f.data(), w.size());
}

double inner_product(std::span<const double> a, std::span<const double> b, const DiscGrid& grid) {
  const auto w = grid.quad_weights();
  return kernels::table().weighted_dot(w.data(), a.data(), b.data(), w.size());
}

double integrate_boundary(std::span<const double> f, const DiscGrid& grid) {
  if (f.size() != static_cast<std::size_t>(grid.sectors())) {
    throw GridError("boundary field must have one value per boundary node");
  }
  const auto w = grid.boundary_arc_weights();
  return kernels::table().weighted_sum(w.data(), f.data(), w.size());
}

ScalarField boundary_values(std::span<const double> f, const DiscGrid& grid) {
  const std::size_t off = grid.boundary_offset();
  return ScalarField(f.begin() + off, f.begin() + off + grid.sectors());
}

ScalarField flux_divergence(std::span<const double> f_u, std::span<const double> f_v,
                            const DiscGrid& grid) {
  const int n_r = grid.rings();
  const int n = grid.sectors();
  const double h = grid.radial_step();
  const double dt = grid.angular_step();
  const auto c = grid.cos_theta();
  const auto s = grid.sin_theta();
  const auto w = grid.quad_weights();
  // Angular faces are stretched so that a constant field has zero
  // divergence on every cell.
  const double stretch = dt / (2.0 * std::sin(dt / 2.0));
  const double ch = std::cos(dt / 2.0), sh = std::sin(dt / 2.0);

  ScalarField net(grid.node_count(), 0.0);

  // Radial faces between ring j and ring j+1 (ring 0 = center).
  for (int j = 0; j < n_r; ++j) {
    const double length = (j + 0.5) * h * dt;
    for (int k = 0; k < n; ++k) {
      const std::size_t a = grid.index(j, k);
      const std::size_t b = grid.index(j + 1, k);
      const double flux =
          0.5 * ((f_u[a] + f_u[b]) * c[k] + (f_v[a] + f_v[b]) * s[k]) * length;
      net[a] += flux;
      net[b] -= flux;
    }
  }
  // Outer boundary faces.
  for (int k = 0; k < n; ++k) {
    const std::size_t b = grid.index(n_r, k);
    net[b] += (f_u[b] * c[k] + f_v[b] * s[k]) * dt;
  }
  // Angular faces between sectors k and k+1.
  for (int j = 1; j <= n_r; ++j) {
    const double length = (j < n_r ? h : 0.5 * h) * stretch;
    for (int k = 0; k < n; ++k) {
      const int k1 = (k + 1) % n;
      // e_theta at theta_k + dt/2
      const double tu = -(s[k] * ch + c[k] * sh);
      const double tv = c[k] * ch - s[k] * sh;
      const std::size_t a = grid.index(j, k);
      const std::size_t b = grid.index(j, k1);
      const double flux = 0.5 * ((f_u[a] + f_u[b]) * tu + (f_v[a] + f_v[b]) * tv) * length;
      net[a] += flux;
      net[b] -= flux;
    }
  }
  for (std::size_t i = 0; i < net.size(); ++i) net[i] /= w[i];
  return net;
}

ScalarField apply_laplacian(std::span<const double> f, const DiscGrid& grid) {
  const int n_r = grid.rings();
  const int n = grid.sectors();
  const double h = grid.radial_step();
  const double dt = grid.angular_step();
  ScalarField out(grid.node_count(), 0.0);

  double mean = 0.0;
  for (int k = 0; k < n; ++k) mean += f[grid.index(1, k)];
  mean /= n;
  out[0] = 4.0 * (mean - f[0]) / (h * h);

  for (int j = 1; j < n_r; ++j) {
    const double r = j * h;
    const double rp = (j + 0.5) * h, rm = (j - 0.5) * h;
    for (int k = 0; k < n; ++k) {
      const std::size_t i = grid.index(j, k);
      const double inner = j == 1 ? f[0] : f[grid.index(j - 1, k)];
      const double outer = f[grid.index(j + 1, k)];
      const double radial = (rp * (outer - f[i]) - rm * (f[i] - inner)) / (r * h * h);
      const double angular =
          (f[grid.index(j, (k + 1) % n)] - 2.0 * f[i] + f[grid.index(j, (k + n - 1) % n)]) /
          (r * r * dt * dt);
      out[i] = radial + angular;
    }
  }
  return out;
}

double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace framelab
