#pragma once

// Closed-form test surfaces with valid frame seeds, and closed-form angle
// fields for twisting a frame inside its gauge orbit.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "framelab/disc_grid.hpp"
#include "framelab/immersion.hpp"

namespace framelab {

class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SurfaceParams {
  /// Only "plane" accepts a codimension; the others fix their own.
  std::optional<int> codimension;
  double a = 1.0;       // clifford_patch frequency, > 0
  double lambda = 1.0;  // scaled_graph amplitude
};

struct CatalogEntry {
  std::string name;
  std::string description;
};

const std::vector<CatalogEntry>& catalog_entries();

/// Throws CatalogError for unknown names (listing the catalog) or invalid
/// parameters.
SurfaceSpec surface_catalog(const std::string& name, const SurfaceParams& params = {});

/// Total torsion of the catalog's initial frame, where known in closed form.
std::optional<double> analytic_total_torsion(const std::string& name,
                                             const SurfaceParams& params = {});

/// Total torsion of a Coulomb frame, where known in closed form.
std::optional<double> analytic_coulomb_torsion(const std::string& name,
                                               const SurfaceParams& params = {});

enum class TwistKind { none, constant, linear, radial_bump };

/// constant: phi = c; linear: phi = a u + b v; radial_bump: phi = c (1 - r^2)^2.
struct TwistSpec {
  TwistKind kind = TwistKind::none;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

TwistKind parse_twist_kind(const std::string& name);
const char* twist_kind_name(TwistKind kind);

ScalarField twist_angle(const TwistSpec& twist, const DiscGrid& grid);

/// Rotates the (N_1, N_2) pair by the twist angle; identity for `none`.
NormalFrameField apply_twist(const NormalFrameField& frame, const TwistSpec& twist,
                             const DiscGrid& grid);

}  // namespace framelab
