#include "nodal_lab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nodal_lab/errors.hpp"

namespace nodal_lab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBesselJ01 = 2.404825557695772768622;

std::pair<std::string, std::string> split_once(const std::string& text,
                                               char sep) {
  auto pos = text.find(sep);
  if (pos == std::string::npos) return {text, ""};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

// "k1=v1,k2=v2" -> ordered pairs; malformed input throws.
std::vector<std::pair<std::string, double>> parse_kv(const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto [key, value] = split_once(item, '=');
    if (value.empty())
      throw InvalidArgument("expected key=value in '" + item + "'");
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size())
      throw InvalidArgument("bad numeric value in '" + item + "'");
    out.emplace_back(key, v);
  }
  return out;
}

}  // namespace

double legendre_p(int l, double x) {
  if (l < 0) throw InvalidArgument("Legendre degree must be >= 0");
  double p0 = 1.0, p1 = x;
  if (l == 0) return p0;
  for (int n = 1; n < l; ++n) {
    double p2 = ((2 * n + 1) * x * p1 - n * p0) / (n + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_p_derivative(int l, double x) {
  if (l == 0) return 0.0;
  // (x^2 - 1) P_l' = l (x P_l - P_{l-1}); zeros are interior so |x| < 1 here.
  return l * (x * legendre_p(l, x) - legendre_p(l - 1, x)) / (x * x - 1.0);
}

std::vector<double> legendre_zeros(int l) {
  if (l < 1) throw InvalidArgument("Legendre zeros need degree >= 1");
  if (l > 128) throw ResourceLimit("Legendre degree capped at 128");
  std::vector<double> zeros(l);
  for (int i = 1; i <= l; ++i) {
    double x = std::cos(kPi * (4.0 * i - 1.0) / (4.0 * l + 2.0));
    for (int iter = 0; iter < 100; ++iter) {
      double step = legendre_p(l, x) / legendre_p_derivative(l, x);
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    zeros[i - 1] = x;
  }
  std::sort(zeros.begin(), zeros.end());
  return zeros;
}

double associated_legendre(int l, int m, double x) {
  if (m < 0 || m > l) throw InvalidArgument("need 0 <= m <= l");
  // P_m^m with Condon-Shortley phase, then upward recurrence in l.
  double pmm = 1.0;
  if (m > 0) {
    double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= -fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

std::vector<double> zonal_nodal_latitudes(int l) {
  auto zeros = legendre_zeros(l);  // ascending in cos(theta)
  std::vector<double> latitudes(l);
  for (int i = 0; i < l; ++i) latitudes[i] = std::acos(zeros[l - 1 - i]);
  return latitudes;  // ascending polar angle
}

AnalyticMode AnalyticMode::sphere_harmonic(int l, int m) {
  if (l < 0 || std::abs(m) > l)
    throw InvalidArgument("spherical harmonic needs l >= 0, |m| <= l");
  if (l > 128) throw ResourceLimit("harmonic degree capped at 128");
  AnalyticMode mode;
  mode.surface = Surface::UnitSphere;
  mode.l = l;
  mode.m = m;
  mode.lambda = static_cast<double>(l) * (l + 1);
  return mode;
}

AnalyticMode AnalyticMode::torus_wave(int kx, int ky, double phase, double lx,
                                      double ly) {
  if (lx <= 0 || ly <= 0) throw InvalidArgument("torus periods must be > 0");
  AnalyticMode mode;
  mode.surface = Surface::FlatTorus;
  mode.kx = kx;
  mode.ky = ky;
  mode.phase = phase;
  mode.lx = lx;
  mode.ly = ly;
  mode.lambda = 4.0 * kPi * kPi *
                (kx * kx / (lx * lx) + ky * ky / (ly * ly));
  return mode;
}

double AnalyticMode::evaluate(const Eigen::Vector3d& p) const {
  if (surface == Surface::FlatTorus)
    return std::cos(2.0 * kPi * (kx * p.x() / lx + ky * p.y() / ly) + phase);

  Eigen::Vector3d q = p.normalized();
  double ct = std::clamp(q.z(), -1.0, 1.0);
  int am = std::abs(m);
  double lg = associated_legendre(l, am, ct);
  double ratio = 1.0;  // (l - |m|)! / (l + |m|)!
  for (int i = l - am + 1; i <= l + am; ++i) ratio /= i;
  double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
  if (m == 0) return norm * lg;
  double phi = std::atan2(q.y(), q.x());
  double angular = m > 0 ? std::cos(am * phi) : std::sin(am * phi);
  return std::numbers::sqrt2 * norm * lg * angular;
}

AnalyticMode AnalyticMode::parse(const std::string& text) {
  auto [head, body] = split_once(text, ':');
  auto kv = parse_kv(body);
  auto get = [&](const std::string& key, double fallback, bool* found =
                                                              nullptr) {
    for (const auto& [k, v] : kv)
      if (k == key) {
        if (found) *found = true;
        return v;
      }
    return fallback;
  };

  if (head == "sphere") {
    for (const auto& [k, v] : kv)
      if (k != "l" && k != "m")
        throw InvalidArgument("unknown sphere mode key '" + k + "'");
    return sphere_harmonic(static_cast<int>(get("l", 0)),
                           static_cast<int>(get("m", 0)));
  }
  if (head == "torus") {
    for (const auto& [k, v] : kv)
      if (k != "kx" && k != "ky" && k != "phase" && k != "lx" && k != "ly")
        throw InvalidArgument("unknown torus mode key '" + k + "'");
    return torus_wave(static_cast<int>(get("kx", 0)),
                      static_cast<int>(get("ky", 0)), get("phase", 0.0),
                      get("lx", 1.0), get("ly", 1.0));
  }
  throw InvalidArgument("unknown mode surface '" + head + "'");
}

std::string AnalyticMode::name() const {
  std::ostringstream os;
  if (surface == Surface::UnitSphere) {
    os << "sphere:l=" << l << ",m=" << m;
  } else {
    os << "torus:kx=" << kx << ",ky=" << ky << ",phase=" << phase;
    if (lx != 1.0 || ly != 1.0) os << ",lx=" << lx << ",ly=" << ly;
  }
  return os.str();
}

Eigen::VectorXd sample(const AnalyticMode& mode, const TriMesh& mesh) {
  if (mode.surface == AnalyticMode::Surface::UnitSphere) {
    if (!mesh.unit_sphere)
      throw GeometryMismatch("sphere mode sampled off the unit sphere");
  } else {
    if (mesh.geometry != TriMesh::Geometry::FlatTorus)
      throw GeometryMismatch("torus mode needs a flat-torus mesh");
    if (std::abs(mesh.period_x - mode.lx) > 1e-12 ||
        std::abs(mesh.period_y - mode.ly) > 1e-12)
      throw GeometryMismatch("torus mode periods do not match the mesh");
  }
  Eigen::VectorXd field(mesh.vertex_count());
#pragma omp parallel for schedule(static)
  for (int v = 0; v < mesh.vertex_count(); ++v)
    field[v] = mode.evaluate(mesh.vertices[v]);
  return field;
}

OracleCurve tube_complement_oracle(const AnalyticMode& mode) {
  OracleCurve curve;
  curve.lambda = mode.lambda;
  curve.description = "tube complement of " + mode.name();

  if (mode.surface == AnalyticMode::Surface::FlatTorus) {
    bool x_wave = mode.kx != 0 && mode.ky == 0;
    bool y_wave = mode.ky != 0 && mode.kx == 0;
    if (!x_wave && !y_wave)
      throw UnsupportedOracle(
          "tube oracle needs a single-frequency torus wave");
    double k = std::abs(x_wave ? mode.kx : mode.ky);
    double period = x_wave ? mode.lx : mode.ly;
    curve.mu = [k, period](double r) {
      return std::max(0.0, 1.0 - 4.0 * k * r / period);
    };
    return curve;
  }

  if (mode.m != 0 || mode.l < 1)
    throw UnsupportedOracle("sphere tube oracle needs a zonal harmonic");
  auto lats = zonal_nodal_latitudes(mode.l);
  curve.mu = [lats](double r) {
    // Normalized area of latitude band [a,b]: (cos a - cos b) / 2.
    auto band = [](double a, double b) {
      return a < b ? 0.5 * (std::cos(a) - std::cos(b)) : 0.0;
    };
    double total = band(0.0, std::max(0.0, lats.front() - r));
    for (size_t i = 0; i + 1 < lats.size(); ++i)
      total += band(lats[i] + r, lats[i + 1] - r);
    total += band(std::min(kPi, lats.back() + r), kPi);
    return total;
  };
  return curve;
}

BoundaryShape BoundaryShape::parse(const std::string& text) {
  auto [head, body] = split_once(text, ':');
  auto kv = parse_kv(body);
  BoundaryShape shape;
  if (head == "disk")
    shape.kind = Kind::Disk;
  else if (head == "square")
    shape.kind = Kind::Square;
  else if (head == "strip")
    shape.kind = Kind::Strip;
  else
    throw UnsupportedOracle("unknown boundary shape '" + head + "'");
  const char* expected = shape.kind == Kind::Disk     ? "r"
                         : shape.kind == Kind::Square ? "l"
                                                      : "w";
  for (const auto& [k, v] : kv) {
    if (k != expected)
      throw InvalidArgument("unknown key '" + k + "' for shape " + head);
    shape.size = v;
  }
  if (shape.size <= 0) throw InvalidArgument("shape size must be > 0");
  return shape;
}

std::string BoundaryShape::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Disk: os << "disk:r=" << size; break;
    case Kind::Square: os << "square:l=" << size; break;
    case Kind::Strip: os << "strip:w=" << size; break;
  }
  return os.str();
}

OracleCurve boundary_oracle(const BoundaryShape& shape) {
  OracleCurve curve;
  curve.description = "boundary complement of " + shape.name();
  double s = shape.size;
  switch (shape.kind) {
    case BoundaryShape::Kind::Disk:
      curve.lambda = kBesselJ01 * kBesselJ01 / (s * s);
      curve.mu = [s](double r) {
        double t = 1.0 - r / s;
        return r < s ? t * t : 0.0;
      };
      break;
    case BoundaryShape::Kind::Square:
      curve.lambda = 2.0 * kPi * kPi / (s * s);
      curve.mu = [s](double r) {
        double t = 1.0 - 2.0 * r / s;
        return 2.0 * r < s ? t * t : 0.0;
      };
      break;
    case BoundaryShape::Kind::Strip:
      curve.lambda = kPi * kPi / (s * s);
      curve.mu = [s](double r) {
        return 2.0 * r < s ? 1.0 - 2.0 * r / s : 0.0;
      };
      break;
  }
  return curve;
}

double max_nodal_distance(const AnalyticMode& mode) {
  if (mode.surface == AnalyticMode::Surface::FlatTorus) {
    bool x_wave = mode.kx != 0 && mode.ky == 0;
    bool y_wave = mode.ky != 0 && mode.kx == 0;
    if (!x_wave && !y_wave)
      throw UnsupportedOracle(
          "nodal density radius needs a single-frequency torus wave");
    double k = std::abs(x_wave ? mode.kx : mode.ky);
    double period = x_wave ? mode.lx : mode.ly;
    return period / (4.0 * k);
  }
  if (mode.m != 0 || mode.l < 1)
    throw UnsupportedOracle("nodal density radius needs a zonal harmonic");
  auto lats = zonal_nodal_latitudes(mode.l);
  double best = std::max(lats.front(), kPi - lats.back());
  for (size_t i = 0; i + 1 < lats.size(); ++i)
    best = std::max(best, 0.5 * (lats[i + 1] - lats[i]));
  return best;
}

}  // namespace nodal_lab
