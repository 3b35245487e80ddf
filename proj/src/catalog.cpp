#include "framelab/catalog.hpp"

#include <cmath>
#include <numbers>

#include "framelab/gauge.hpp"

namespace framelab {
namespace {

SmallVector unit(int dim, int axis) {
  SmallVector e = SmallVector::Zero(dim);
  e[axis] = 1.0;
  return e;
}

std::vector<SmallVector> trailing_axes(int dim, int count) {
  std::vector<SmallVector> seeds;
  for (int s = 0; s < count; ++s) seeds.push_back(unit(dim, dim - count + s));
  return seeds;
}

SurfacePoint zero_point(int dim) {
  SurfacePoint p;
  p.x = p.xu = p.xv = p.xuu = p.xuv = p.xvv = SmallVector::Zero(dim);
  return p;
}

// (u, v, lambda (u^2 - v^2) / 2, lambda u v, 0, ...) in R^dim.
SurfaceSpec graph(std::string name, int dim, double lambda) {
  SurfaceSpec spec;
  spec.name = std::move(name);
  spec.codimension = dim - 2;
  spec.evaluate = [dim, lambda](double u, double v) {
    SurfacePoint p = zero_point(dim);
    p.x[0] = u;
    p.x[1] = v;
    p.x[2] = 0.5 * lambda * (u * u - v * v);
    p.x[3] = lambda * u * v;
    p.xu[0] = 1.0;
    p.xu[2] = lambda * u;
    p.xu[3] = lambda * v;
    p.xv[1] = 1.0;
    p.xv[2] = -lambda * v;
    p.xv[3] = lambda * u;
    p.xuu[2] = lambda;
    p.xvv[2] = -lambda;
    p.xuv[3] = lambda;
    return p;
  };
  spec.seeds = trailing_axes(dim, dim - 2);
  return spec;
}

SurfaceSpec plane(int n) {
  if (n < 1 || n > kMaxCodimension) {
    throw CatalogError("plane: codimension must lie in 1.." + std::to_string(kMaxCodimension));
  }
  SurfaceSpec spec;
  spec.name = "plane";
  spec.codimension = n;
  const int dim = n + 2;
  spec.evaluate = [dim](double u, double v) {
    SurfacePoint p = zero_point(dim);
    p.x[0] = u;
    p.x[1] = v;
    p.xu[0] = 1.0;
    p.xv[1] = 1.0;
    return p;
  };
  spec.seeds = trailing_axes(dim, n);
  return spec;
}

SurfaceSpec clifford_patch(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw CatalogError("clifford_patch: a must be positive");
  SurfaceSpec spec;
  spec.name = "clifford_patch";
  spec.codimension = 2;
  const double k = 1.0 / (a * std::numbers::sqrt2);
  spec.evaluate = [a, k](double u, double v) {
    const double cu = std::cos(a * u), su = std::sin(a * u);
    const double cv = std::cos(a * v), sv = std::sin(a * v);
    SurfacePoint p = zero_point(4);
    p.x << k * cu, k * su, k * cv, k * sv;
    p.xu << -a * k * su, a * k * cu, 0.0, 0.0;
    p.xv << 0.0, 0.0, -a * k * sv, a * k * cv;
    p.xuu << -a * a * k * cu, -a * a * k * su, 0.0, 0.0;
    p.xvv << 0.0, 0.0, -a * a * k * cv, -a * a * k * sv;
    return p;
  };
  // Radial directions of the two circle factors: a parallel normal frame.
  spec.analytic_frame = [a](double u, double v) {
    SmallMatrix f = SmallMatrix::Zero(4, 2);
    f(0, 0) = std::cos(a * u);
    f(1, 0) = std::sin(a * u);
    f(2, 1) = std::cos(a * v);
    f(3, 1) = std::sin(a * v);
    return f;
  };
  return spec;
}

void reject_codimension(const std::string& name, const SurfaceParams& params, int fixed) {
  if (params.codimension && *params.codimension != fixed) {
    throw CatalogError(name + ": codimension is fixed at " + std::to_string(fixed));
  }
}

double graph_torsion(double lambda) {
  const double l2 = lambda * lambda;
  return 2.0 * std::numbers::pi * (std::log1p(l2) + 1.0 / (1.0 + l2) - 1.0);
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"plane", "(u, v, 0, ..., 0) in R^(n+2); param codimension (default 2)"},
      {"holomorphic_graph", "(u, v, (u^2 - v^2)/2, uv) in R^4; seeds e3, e4"},
      {"holomorphic_graph_embedded", "holomorphic graph in R^5; seeds e3, e4, e5 (n = 3)"},
      {"clifford_patch", "(cos au, sin au, cos av, sin av)/(a sqrt 2); param a > 0; parallel frame"},
      {"scaled_graph", "(u, v, lambda (u^2 - v^2)/2, lambda uv) in R^4; param lambda"},
  };
  return entries;
}

SurfaceSpec surface_catalog(const std::string& name, const SurfaceParams& params) {
  if (name == "plane") return plane(params.codimension.value_or(2));
  if (name == "holomorphic_graph") {
    reject_codimension(name, params, 2);
    return graph(name, 4, 1.0);
  }
  if (name == "holomorphic_graph_embedded") {
    reject_codimension(name, params, 3);
    return graph(name, 5, 1.0);
  }
  if (name == "clifford_patch") {
    reject_codimension(name, params, 2);
    return clifford_patch(params.a);
  }
  if (name == "scaled_graph") {
    reject_codimension(name, params, 2);
    if (!std::isfinite(params.lambda)) throw CatalogError("scaled_graph: lambda must be finite");
    return graph(name, 4, params.lambda);
  }
  std::string msg = "unknown surface '" + name + "'; catalog:";
  for (const auto& e : catalog_entries()) msg += " " + e.name;
  throw CatalogError(msg);
}

std::optional<double> analytic_total_torsion(const std::string& name,
                                             const SurfaceParams& params) {
  if (name == "plane" || name == "clifford_patch") return 0.0;
  if (name == "holomorphic_graph" || name == "holomorphic_graph_embedded") {
    return graph_torsion(1.0);
  }
  if (name == "scaled_graph") return graph_torsion(params.lambda);
  return std::nullopt;
}

std::optional<double> analytic_coulomb_torsion(const std::string& name,
                                               const SurfaceParams& params) {
  // The seeded graph frames are already Coulomb.
  return analytic_total_torsion(name, params);
}

TwistKind parse_twist_kind(const std::string& name) {
  if (name == "none") return TwistKind::none;
  if (name == "constant") return TwistKind::constant;
  if (name == "linear") return TwistKind::linear;
  if (name == "radial_bump") return TwistKind::radial_bump;
  throw CatalogError("unknown twist '" + name + "'; expected none, constant, linear, radial_bump");
}

const char* twist_kind_name(TwistKind kind) {
  switch (kind) {
    case TwistKind::constant:
      return "constant";
    case TwistKind::linear:
      return "linear";
    case TwistKind::radial_bump:
      return "radial_bump";
    case TwistKind::none:
      break;
  }
  return "none";
}

ScalarField twist_angle(const TwistSpec& twist, const DiscGrid& grid) {
  return grid.sample([&twist](double u, double v) {
    switch (twist.kind) {
      case TwistKind::constant:
        return twist.c;
      case TwistKind::linear:
        return twist.a * u + twist.b * v;
      case TwistKind::radial_bump: {
        const double q = 1.0 - u * u - v * v;
        return twist.c * q * q;
      }
      case TwistKind::none:
        break;
    }
    return 0.0;
  });
}

NormalFrameField apply_twist(const NormalFrameField& frame, const TwistSpec& twist,
                             const DiscGrid& grid) {
  if (twist.kind == TwistKind::none) return frame;
  if (frame.codimension() < 2) throw CatalogError("a twist needs codimension at least 2");
  const ScalarField phi = twist_angle(twist, grid);
  return apply_rotation(frame, plane_rotation(frame.codimension(), phi));
}

}  // namespace framelab
