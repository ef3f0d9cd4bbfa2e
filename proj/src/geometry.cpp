#include "nanoqed/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nanoqed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Box slab_box(const Slab& s) {
  return {Vec3(-s.thickness, -s.extent_y / 2, -s.extent_z / 2), Vec3(0.0, s.extent_y / 2, s.extent_z / 2)};
}

bool box_contains(const Box& b, const Vec3& p) {
  return (p.array() > b.lo.array()).all() && (p.array() < b.hi.array()).all();
}

double box_distance(const Box& b, const Vec3& p) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = std::max({b.lo(i) - p(i), 0.0, p(i) - b.hi(i)});
    s += d * d;
  }
  return std::sqrt(s);
}

bool box_ray(const Box& b, const Vec3& o, const Vec3& d, double& t0, double& t1) {
  t0 = 0.0;
  t1 = kInf;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d(i)) < 1e-300) {
      if (o(i) <= b.lo(i) || o(i) >= b.hi(i)) return false;
      continue;
    }
    double ta = (b.lo(i) - o(i)) / d(i);
    double tb = (b.hi(i) - o(i)) / d(i);
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return false;
  }
  return true;
}

bool cylinder_ray(const Cylinder& c, const Vec3& o, const Vec3& d, double& t0, double& t1) {
  t0 = 0.0;
  t1 = kInf;
  const double half = c.length / 2;
  if (std::abs(d.z()) < 1e-300) {
    if (std::abs(o.z()) >= half) return false;
  } else {
    double ta = (-half - o.z()) / d.z();
    double tb = (half - o.z()) / d.z();
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  const double A = d.x() * d.x() + d.y() * d.y();
  const double B = o.x() * d.x() + o.y() * d.y();
  const double C = o.x() * o.x() + o.y() * o.y() - c.radius * c.radius;
  if (A < 1e-300) {
    if (C >= 0.0) return false;
  } else {
    const double disc = B * B - A * C;
    if (disc <= 0.0) return false;
    const double sq = std::sqrt(disc);
    // Numerically stable pair of roots.
    const double qq = -(B + std::copysign(sq, B));
    double ra = qq / A;
    double rb = (qq != 0.0) ? C / qq : -ra;
    if (ra > rb) std::swap(ra, rb);
    t0 = std::max(t0, ra);
    t1 = std::min(t1, rb);
  }
  return t0 < t1;
}

}  // namespace

std::string geometry_name(const Geometry& g) {
  return std::visit(overloaded{[](const Cylinder&) { return std::string("cylinder"); },
                               [](const CombPCW&) { return std::string("comb"); },
                               [](const Slab&) { return std::string("slab"); },
                               [](const Box&) { return std::string("box"); }},
                    g);
}

AtomSite parse_atom_site(const std::string& name) {
  if (name == "radial") return AtomSite::Radial;
  if (name == "behind-tooth") return AtomSite::BehindTooth;
  if (name == "between-teeth") return AtomSite::BetweenTeeth;
  if (name == "normal") return AtomSite::Normal;
  throw ConfigError("unknown atom site '" + name + "' (radial, behind-tooth, between-teeth, normal)");
}

std::string atom_site_name(AtomSite site) {
  switch (site) {
    case AtomSite::Radial: return "radial";
    case AtomSite::BehindTooth: return "behind-tooth";
    case AtomSite::BetweenTeeth: return "between-teeth";
    case AtomSite::Normal: return "normal";
  }
  return "?";
}

void validate(const Geometry& g) {
  std::visit(overloaded{
                 [](const Cylinder& c) {
                   if (!(c.radius > 0.0) || !(c.length > 0.0) || !std::isfinite(c.length))
                     throw ConfigError("cylinder needs finite positive radius and length");
                 },
                 [](const CombPCW& c) {
                   if (!(c.period > 0 && c.tooth_height > 0 && c.tooth_width > 0 && c.backbone_width > 0 &&
                         c.backbone_thickness > 0 && c.length > 0))
                     throw ConfigError("comb dimensions must all be positive");
                   if (c.tooth_width >= c.period) throw ConfigError("comb tooth width must be below the period");
                   if (c.length < c.tooth_width) throw ConfigError("comb is shorter than one tooth");
                 },
                 [](const Slab& s) {
                   if (!(s.thickness > 0 && s.extent_y > 0 && s.extent_z > 0))
                     throw ConfigError("slab dimensions must be positive");
                 },
                 [](const Box& b) {
                   if (!(b.hi.array() > b.lo.array()).all()) throw ConfigError("box needs hi > lo on every axis");
                 }},
             g);
}

Geometry scaled(const Geometry& g, double f) {
  return std::visit(overloaded{[f](const Cylinder& c) -> Geometry { return Cylinder{c.radius * f, c.length * f}; },
                               [f](const CombPCW& c) -> Geometry {
                                 return CombPCW{c.period * f,         c.tooth_height * f,
                                                c.tooth_width * f,    c.backbone_width * f,
                                                c.backbone_thickness * f, c.length * f};
                               },
                               [f](const Slab& s) -> Geometry { return Slab{s.thickness * f, s.extent_y * f, s.extent_z * f}; },
                               [f](const Box& b) -> Geometry { return Box{b.lo * f, b.hi * f}; }},
                    g);
}

std::vector<Box> comb_boxes(const CombPCW& c) {
  std::vector<Box> boxes;
  const double ht = c.backbone_thickness / 2;
  boxes.push_back({Vec3(-c.backbone_width, -ht, -c.length / 2), Vec3(0.0, ht, c.length / 2)});
  const int kmax = static_cast<int>(std::floor((c.length - c.tooth_width) / 2 / c.period + 1e-9));
  for (int k = -kmax; k <= kmax; ++k) {
    const double zc = k * c.period;
    boxes.push_back({Vec3(0.0, -ht, zc - c.tooth_width / 2), Vec3(c.tooth_height, ht, zc + c.tooth_width / 2)});
  }
  return boxes;
}

bool contains(const Geometry& g, const Vec3& p) {
  return std::visit(
      overloaded{[&](const Cylinder& c) {
                   return p.x() * p.x() + p.y() * p.y() < c.radius * c.radius && std::abs(p.z()) < c.length / 2;
                 },
                 [&](const CombPCW& c) {
                   const auto boxes = comb_boxes(c);
                   if (box_contains(boxes.front(), p)) return true;
                   // Teeth and backbone share the x = 0 face; count it as interior.
                   for (std::size_t i = 1; i < boxes.size(); ++i) {
                     Box grown = boxes[i];
                     grown.lo.x() = -1e-12;
                     if (box_contains(grown, p)) return true;
                   }
                   return false;
                 },
                 [&](const Slab& s) { return box_contains(slab_box(s), p); },
                 [&](const Box& b) { return box_contains(b, p); }},
      g);
}

double volume(const Geometry& g) {
  return std::visit(overloaded{[](const Cylinder& c) { return std::numbers::pi * c.radius * c.radius * c.length; },
                               [](const CombPCW& c) {
                                 double v = 0.0;
                                 for (const auto& b : comb_boxes(c)) v += (b.hi - b.lo).prod();
                                 return v;
                               },
                               [](const Slab& s) { return s.thickness * s.extent_y * s.extent_z; },
                               [](const Box& b) { return (b.hi - b.lo).prod(); }},
                    g);
}

Box bounding_box(const Geometry& g) {
  return std::visit(overloaded{[](const Cylinder& c) {
                                 return Box{Vec3(-c.radius, -c.radius, -c.length / 2),
                                            Vec3(c.radius, c.radius, c.length / 2)};
                               },
                               [](const CombPCW& c) {
                                 const double ht = c.backbone_thickness / 2;
                                 return Box{Vec3(-c.backbone_width, -ht, -c.length / 2),
                                            Vec3(c.tooth_height, ht, c.length / 2)};
                               },
                               [](const Slab& s) { return slab_box(s); }, [](const Box& b) { return b; }},
                    g);
}

double clearance(const Geometry& g, const Vec3& p) {
  if (contains(g, p)) return 0.0;
  return std::visit(overloaded{[&](const Cylinder& c) {
                                 const double dr = std::max(std::hypot(p.x(), p.y()) - c.radius, 0.0);
                                 const double dz = std::max(std::abs(p.z()) - c.length / 2, 0.0);
                                 return std::hypot(dr, dz);
                               },
                               [&](const CombPCW& c) {
                                 double best = kInf;
                                 for (const auto& b : comb_boxes(c)) best = std::min(best, box_distance(b, p));
                                 return best;
                               },
                               [&](const Slab& s) { return box_distance(slab_box(s), p); },
                               [&](const Box& b) { return box_distance(b, p); }},
                    g);
}

std::vector<std::pair<double, double>> ray_segments(const Geometry& g, const Vec3& o, const Vec3& d) {
  std::vector<std::pair<double, double>> out;
  double t0 = 0.0, t1 = 0.0;
  std::visit(overloaded{[&](const Cylinder& c) {
                          if (cylinder_ray(c, o, d, t0, t1)) out.emplace_back(t0, t1);
                        },
                        [&](const CombPCW& c) {
                          for (const auto& b : comb_boxes(c))
                            if (box_ray(b, o, d, t0, t1)) out.emplace_back(t0, t1);
                          std::sort(out.begin(), out.end());
                        },
                        [&](const Slab& s) {
                          if (box_ray(slab_box(s), o, d, t0, t1)) out.emplace_back(t0, t1);
                        },
                        [&](const Box& b) {
                          if (box_ray(b, o, d, t0, t1)) out.emplace_back(t0, t1);
                        }},
             g);
  return out;
}

Vec3 atom_site(const Geometry& g, AtomSite site, double distance) {
  if (!(distance > 0.0)) throw ConfigError("atom distance must be positive");
  auto incompatible = [&]() {
    return ConfigError("atom site '" + atom_site_name(site) + "' does not apply to geometry '" + geometry_name(g) + "'");
  };
  return std::visit(overloaded{[&](const Cylinder& c) -> Vec3 {
                                 if (site != AtomSite::Radial) throw incompatible();
                                 if (distance <= c.radius) throw ConfigError("radial distance must exceed the cylinder radius");
                                 return Vec3(distance, 0.0, 0.0);
                               },
                               [&](const CombPCW& c) -> Vec3 {
                                 if (site == AtomSite::BehindTooth) return Vec3(c.tooth_height + distance, 0.0, 0.0);
                                 if (site == AtomSite::BetweenTeeth)
                                   return Vec3(c.tooth_height + distance, 0.0, c.period / 2);
                                 throw incompatible();
                               },
                               [&](const Slab&) -> Vec3 {
                                 if (site != AtomSite::Normal) throw incompatible();
                                 return Vec3(distance, 0.0, 0.0);
                               },
                               [&](const Box& b) -> Vec3 {
                                 if (site != AtomSite::Normal) throw incompatible();
                                 const Vec3 mid = 0.5 * (b.lo + b.hi);
                                 return Vec3(b.hi.x() + distance, mid.y(), mid.z());
                               }},
                    g);
}

Vec3 symmetry_axis(const Geometry& g, const Vec3& atom) {
  if (std::holds_alternative<Cylinder>(g)) {
    const Vec3 radial(atom.x(), atom.y(), 0.0);
    if (radial.norm() > 0.0) return Vec3::UnitZ().cross(radial.normalized());
  }
  return Vec3::UnitY();
}

}  // namespace nanoqed
