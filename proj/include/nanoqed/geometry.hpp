#pragma once

// Dielectric nanostructure shapes. All lengths here are internal units; the
// configuration layer converts from nanometres.

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nanoqed/core.hpp"

namespace nanoqed {

/// Circular cylinder, axis z, centred at the origin.
struct Cylinder {
  double radius = 0.0;
  double length = 0.0;
};

/// One-sided comb waveguide. The backbone occupies x in [-backbone_width, 0],
/// the teeth x in [0, tooth_height]; both have |y| <= backbone_thickness / 2.
/// Teeth are centred at z = k * period for every k that fits inside the length,
/// so a tooth always sits at z = 0 and a gap midpoint at z = period / 2.
struct CombPCW {
  double period = 0.0;
  double tooth_height = 0.0;
  double tooth_width = 0.0;
  double backbone_width = 0.0;
  double backbone_thickness = 0.0;
  double length = 0.0;
};

/// Slab x in [-thickness, 0] with lateral extents (infinite values allowed,
/// which turns it into a half-space).
struct Slab {
  double thickness = 0.0;
  double extent_y = 0.0;
  double extent_z = 0.0;
};

/// Axis-aligned box.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
};

using Geometry = std::variant<Cylinder, CombPCW, Slab, Box>;

enum class AtomSite { Radial, BehindTooth, BetweenTeeth, Normal };

std::string geometry_name(const Geometry& g);
AtomSite parse_atom_site(const std::string& name);
std::string atom_site_name(AtomSite site);

void validate(const Geometry& g);
Geometry scaled(const Geometry& g, double factor);

bool contains(const Geometry& g, const Vec3& p);
double volume(const Geometry& g);
Box bounding_box(const Geometry& g);
/// Distance from an outside point to the body; 0 for points inside or on it.
double clearance(const Geometry& g, const Vec3& p);

/// Parameter intervals [t_in, t_out] (t >= 0, t_out may be +inf) where the
/// ray origin + t * dir (|dir| = 1) lies inside the body. Intervals of
/// different pieces of a composite body do not overlap.
std::vector<std::pair<double, double>> ray_segments(const Geometry& g, const Vec3& origin, const Vec3& dir);

/// Convex pieces of a comb: backbone first, then teeth by ascending z.
std::vector<Box> comb_boxes(const CombPCW& c);

/// Reference-atom position for a named site at the given distance:
/// Cylinder/Radial: distance is rho, measured from the axis.
/// CombPCW/BehindTooth, BetweenTeeth: distance is measured from the tooth-tip plane.
/// Slab, Box/Normal: distance along +x from the x-max face.
Vec3 atom_site(const Geometry& g, AtomSite site, double distance);

/// Local symmetry axis used to label eigenstates: the azimuthal direction at the
/// atom for a cylinder, y otherwise.
Vec3 symmetry_axis(const Geometry& g, const Vec3& atom);

}  // namespace nanoqed
