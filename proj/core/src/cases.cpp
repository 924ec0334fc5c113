#include "stcut/cases.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

namespace stcut {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double eps = 1e-5;  // central-difference step

// sin(pi r) / r, continuous at r = 0
double sinc_pi(double r) { return r < 1e-8 ? pi : std::sin(pi * r) / r; }

// h = h0 / 2^i, 2^{i+1} slabs
std::pair<double, int> dyadic_schedule(double h0, int i) { return {h0 * std::ldexp(1.0, -i), 1 << (i + 1)}; }

}  // namespace

TransportData CaseDefinition::transport_data() const {
  return TransportData{velocity, divergence, source, initial};
}

CaseDefinition expanding_circle_case(double beta) {
  CaseDefinition c;
  c.name = "expanding_circle";
  c.box = Box{Vec2(-3.5, -3.5), Vec2(3.5, 3.5)};
  c.t0 = 0.0;
  c.t_end = 1.0;

  auto radius = [beta](const Vec2& x, double t) { return std::exp(-beta * t) * x.norm(); };
  c.levelset = [radius](const Vec2& x, double t) { return radius(x, t) - 1.0; };
  c.velocity = [beta](const Vec2& x, double) { return Vec2(beta * x); };
  c.divergence = [beta](const Vec2&, double) { return 2.0 * beta; };

  c.exact.u = [radius](const Vec2& x, double t) {
    return std::cos(pi * radius(x, t)) * std::sin(pi * t / 2.0);
  };
  // grad r = e^{-2 beta t} x / r
  c.exact.grad = [radius, beta](const Vec2& x, double t) {
    const double r = radius(x, t);
    return Vec2(-pi * sinc_pi(r) * std::exp(-2.0 * beta * t) * std::sin(pi * t / 2.0) * x);
  };
  // dt r = -beta r
  c.exact.dt = [radius, beta](const Vec2& x, double t) {
    const double r = radius(x, t);
    return pi * beta * r * std::sin(pi * r) * std::sin(pi * t / 2.0) +
           pi / 2.0 * std::cos(pi * r) * std::cos(pi * t / 2.0);
  };
  // r is constant along the flow, so dt u + w.grad u only sees the time factor
  c.source = [radius, beta](const Vec2& x, double t) {
    const double r = radius(x, t);
    return std::cos(pi * r) * (pi / 2.0 * std::cos(pi * t / 2.0) + 2.0 * beta * std::sin(pi * t / 2.0));
  };
  c.initial = [](const Vec2&) { return 0.0; };
  c.schedule = [](int i) { return dyadic_schedule(0.9, i); };
  return c;
}

CaseDefinition translating_circle_case() {
  CaseDefinition c;
  c.name = "translating_circle";
  c.box = Box{Vec2(-2.5, -2.5), Vec2(2.5, 2.5)};
  c.t0 = 0.0;
  c.t_end = 1.0;
  const Vec2 w(1.0, 0.5);
  const Vec2 c0(-0.5, -0.25);

  auto local = [w, c0](const Vec2& x, double t) -> Vec2 { return x - c0 - t * w; };
  c.levelset = [local](const Vec2& x, double t) { return local(x, t).norm() - 1.0; };
  c.velocity = [w](const Vec2&, double) { return w; };
  c.divergence = [](const Vec2&, double) { return 0.0; };

  // u = (1 + t) cos(pi s / 2) with s = |x - c(t)|^2
  c.exact.u = [local](const Vec2& x, double t) {
    return (1.0 + t) * std::cos(pi * local(x, t).squaredNorm() / 2.0);
  };
  c.exact.grad = [local](const Vec2& x, double t) {
    const Vec2 y = local(x, t);
    return Vec2(-(1.0 + t) * std::sin(pi * y.squaredNorm() / 2.0) * pi * y);
  };
  c.exact.dt = [local, w](const Vec2& x, double t) {
    const Vec2 y = local(x, t);
    const double s = y.squaredNorm();
    return std::cos(pi * s / 2.0) + (1.0 + t) * std::sin(pi * s / 2.0) * pi * y.dot(w);
  };
  c.source = [local](const Vec2& x, double t) {
    return std::cos(pi * local(x, t).squaredNorm() / 2.0);
  };
  c.initial = [u = c.exact.u](const Vec2& x) { return u(x, 0.0); };
  c.schedule = [](int i) { return dyadic_schedule(0.5, i); };
  return c;
}

std::vector<std::string> case_names() { return {"expanding_circle", "translating_circle"}; }

CaseDefinition make_case(const std::string& name) {
  if (name == "expanding_circle") return expanding_circle_case();
  if (name == "translating_circle") return translating_circle_case();
  throw std::invalid_argument("unknown case: " + name);
}

namespace {

template <class F>
FieldCheck sample_box(const CaseDefinition& c, int points, std::uint64_t seed, F&& defect) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(c.box.lower.x(), c.box.upper.x());
  std::uniform_real_distribution<double> uy(c.box.lower.y(), c.box.upper.y());
  std::uniform_real_distribution<double> ut(c.t0, c.t_end);
  FieldCheck out;
  while (out.points < points) {
    const Vec2 x(ux(rng), uy(rng));
    const double t = ut(rng);
    const auto d = defect(x, t);
    if (!d) continue;
    out.max_error = std::max(out.max_error, std::abs(*d));
    ++out.points;
  }
  return out;
}

}  // namespace

FieldCheck check_source(const CaseDefinition& c, int points, std::uint64_t seed) {
  return sample_box(c, points, seed, [&c](const Vec2& x, double t) -> std::optional<double> {
    const Vec2 ex(eps, 0.0), ey(0.0, eps);
    const double dt = (c.exact.u(x, t + eps) - c.exact.u(x, t - eps)) / (2 * eps);
    auto flux = [&c](const Vec2& p, double s) { return Vec2(c.velocity(p, s) * c.exact.u(p, s)); };
    const double div = (flux(x + ex, t).x() - flux(x - ex, t).x()) / (2 * eps) +
                       (flux(x + ey, t).y() - flux(x - ey, t).y()) / (2 * eps);
    return c.source(x, t) - (dt + div);
  });
}

FieldCheck check_exact_derivatives(const CaseDefinition& c, int points, std::uint64_t seed) {
  return sample_box(c, points, seed, [&c](const Vec2& x, double t) -> std::optional<double> {
    const auto& u = c.exact.u;
    const double dt = (u(x, t + eps) - u(x, t - eps)) / (2 * eps);
    const Vec2 g((u(x + Vec2(eps, 0), t) - u(x - Vec2(eps, 0), t)) / (2 * eps),
                 (u(x + Vec2(0, eps), t) - u(x - Vec2(0, eps), t)) / (2 * eps));
    return std::max(std::abs(dt - c.exact.dt(x, t)), (g - c.exact.grad(x, t)).lpNorm<Eigen::Infinity>());
  });
}

FieldCheck check_levelset_transport(const CaseDefinition& c, int points, std::uint64_t seed) {
  return sample_box(c, points, seed, [&c](const Vec2& x, double t) -> std::optional<double> {
    const double phi = c.levelset(x, t);
    if (!(phi > -0.9 && phi < 1.0)) return std::nullopt;  // away from the kink at the centre
    const Vec2 w = c.velocity(x, t);
    const double dt = (c.levelset(x, t + eps) - c.levelset(x, t - eps)) / (2 * eps);
    const double dx = (c.levelset(x + Vec2(eps, 0), t) - c.levelset(x - Vec2(eps, 0), t)) / (2 * eps);
    const double dy = (c.levelset(x + Vec2(0, eps), t) - c.levelset(x - Vec2(0, eps), t)) / (2 * eps);
    return dt + w.x() * dx + w.y() * dy;
  });
}

}  // namespace stcut
