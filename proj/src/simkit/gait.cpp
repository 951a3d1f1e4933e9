#include "terramap/simkit/gait.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "terramap/error.hpp"

namespace terramap::simkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quintic smoothstep and its first two derivatives.
double smooth(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smooth_d(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
double smooth_dd(double u) { return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); }
// Integral of smooth from 0 to u.
double smooth_i(double u) { return u * u * u * u * (2.5 + u * (-3.0 + u)); }

struct Osc {
  double v, d, dd;
};

// envelope(tau) * sin(w tau + phi), with the envelope rising over `ramp`.
Osc oscillation(double tau, double ramp, double w, double phi) {
  if (tau <= 0.0) return {0.0, 0.0, 0.0};
  double e = 1.0, de = 0.0, dde = 0.0;
  if (ramp > 0.0 && tau < ramp) {
    const double u = tau / ramp;
    e = smooth(u);
    de = smooth_d(u) / ramp;
    dde = smooth_dd(u) / (ramp * ramp);
  }
  const double s = std::sin(w * tau + phi);
  const double c = std::cos(w * tau + phi);
  return {e * s, de * s + e * w * c, dde * s + 2.0 * de * w * c - e * w * w * s};
}

Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

}  // namespace

void GaitParams::validate() const {
  if (!(frequency > 0.0)) throw InvalidInput("gait frequency must be positive");
  if (!(duty > 0.0 && duty < 1.0)) throw InvalidInput("gait duty factor must be in (0, 1)");
  if (!(step_length > 0.0)) throw InvalidInput("gait step length must be positive");
  if (!(base_height > 0.0)) throw InvalidInput("gait base height must be positive");
  if (!(swing_height >= 0.0)) throw InvalidInput("gait swing height must be non-negative");
}

GaitState gait_schedule(const GaitParams& gp, double t) {
  if (!(t >= 0.0)) throw InvalidInput("gait time must be non-negative");
  GaitState g;
  for (int i = 0; i < kNumFeet; ++i) {
    const double x = gp.frequency * t + gp.phase_offset[i];
    g.phase[i] = x - std::floor(x);
    g.contact[i] = g.phase[i] < gp.duty;
  }
  return g;
}

double PathCommand::walk_duration() const {
  if (!moving()) return 0.0;
  if (length <= 0.0) return kInf;
  return length / speed + ramp_time;
}

Motion::Motion(const Terrain& terrain, const GaitParams& gait, const PathCommand& path,
                       double duration)
    : terrain_(terrain), gait_(gait), path_(path), duration_(duration) {
  gait_.validate();
  if (!(duration > 0.0)) throw InvalidInput("scenario duration must be positive");
  if (!(path.speed >= 0.0) || !(path.ramp_time >= 0.0) || !(path.start_time >= 0.0)) {
    throw InvalidInput("path speed, ramp time and start time must be non-negative");
  }
  if (path.moving() && path.length > 0.0 && path.length < path.speed * path.ramp_time) {
    throw InvalidInput("path too short for its speed ramp");
  }

  const double f = gait_.frequency;
  const double tw = path_.start_time;
  for (int i = 0; i < kNumFeet; ++i) {
    auto& st = stances_[i];
    const Vec3 standing = foothold(i, 0.0);
    if (!path_.moving()) {
      st.push_back({-kInf, kInf, standing});
      continue;
    }
    const double off = gait_.phase_offset[i];
    auto begin = [&](long n) { return tw + (static_cast<double>(n) - off) / f; };
    auto end = [&](long n) { return tw + (static_cast<double>(n) - off + gait_.duty) / f; };

    long n = static_cast<long>(std::floor(off - gait_.duty)) - 1;
    while (end(n) <= tw) ++n;
    if (begin(n) <= tw) {
      st.push_back({-kInf, end(n), standing});
      ++n;
    } else {
      st.push_back({-kInf, tw, standing});
    }
    for (; begin(n) < duration_; ++n) {
      const double tb = begin(n);
      const double te = end(n);
      st.push_back({tb, te, foothold(i, 0.5 * (tb + te))});
    }
    st.back().t_end = kInf;
  }
}

void Motion::arc(double t, double& s, double& ds, double& dds) const {
  s = ds = dds = 0.0;
  if (!path_.moving()) return;
  const double tau = t - path_.start_time;
  if (tau <= 0.0) return;
  const double v = path_.speed;
  const double r = path_.ramp_time;
  const double total = path_.walk_duration();

  auto rising = [&](double x, double& ps, double& pds, double& pdds) {
    if (r > 0.0 && x < r) {
      const double u = x / r;
      ps = v * r * smooth_i(u);
      pds = v * smooth(u);
      pdds = v * smooth_d(u) / r;
    } else {
      ps = v * (0.5 * r + (x - r));
      pds = v;
      pdds = 0.0;
    }
  };

  if (tau >= total) {
    s = path_.length;
    return;
  }
  if (path_.length > 0.0 && tau > total - r) {
    double ps, pds, pdds;
    rising(total - tau, ps, pds, pdds);
    s = path_.length - ps;
    ds = pds;
    dds = -pdds;
    return;
  }
  rising(tau, s, ds, dds);
}

PoseSample Motion::pose(double t) const {
  PoseSample p;
  p.t = t;
  double s, ds, dds;
  arc(t, s, ds, dds);
  const double c = std::cos(path_.heading);
  const double sn = std::sin(path_.heading);
  const Vec3 u(c, sn, 0.0);

  const double tau = path_.moving() ? t - path_.start_time : 0.0;
  const double w = 2.0 * M_PI * gait_.frequency;
  const Osc bob = oscillation(tau, path_.ramp_time, 2.0 * w, 0.0);
  const Osc roll = oscillation(tau, path_.ramp_time, w, 0.0);
  const Osc pitch = oscillation(tau, path_.ramp_time, w, 0.5 * M_PI);

  p.pos = Vec3(path_.start.x(), path_.start.y(), terrain_.spec().ground + gait_.base_height) +
          s * u + Vec3(0.0, 0.0, gait_.bob * bob.v);
  p.vel = ds * u + Vec3(0.0, 0.0, gait_.bob * bob.d);
  p.acc = dds * u + Vec3(0.0, 0.0, gait_.bob * bob.dd);

  const double phi = gait_.roll * roll.v;
  const double theta = gait_.pitch * pitch.v;
  p.rot = rot_z(path_.heading) * rot_y(theta) * rot_x(phi);
  p.ang_vel = rot_x(phi).transpose() * Vec3(0.0, gait_.pitch * pitch.d, 0.0) +
              Vec3(gait_.roll * roll.d, 0.0, 0.0);
  return p;
}

Vec3 Motion::foothold(int leg, double t_mid) const {
  const PoseSample p = pose(std::min(t_mid, duration_));
  const Vec3 nominal = p.pos + p.rot * gait_.hip[leg];
  const Vec3 u(std::cos(path_.heading), std::sin(path_.heading), 0.0);
  const double floor_z = terrain_.spec().ground - 0.2;
  const auto safe = [&](double x, double y) {
    constexpr double m = 0.03;
    return terrain_.height(x, y) >= floor_z && terrain_.height(x + m, y) >= floor_z &&
           terrain_.height(x - m, y) >= floor_z && terrain_.height(x, y + m) >= floor_z &&
           terrain_.height(x, y - m) >= floor_z;
  };
  const double reach = 0.5 * gait_.step_length;
  const int steps = static_cast<int>(std::floor(reach / 0.01 + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    for (int sign : {1, -1}) {
      if (k == 0 && sign < 0) continue;
      const double x = nominal.x() + sign * 0.01 * k * u.x();
      const double y = nominal.y() + sign * 0.01 * k * u.y();
      if (safe(x, y)) return Vec3(x, y, terrain_.height(x, y));
    }
  }
  throw InfeasibleScenario("no safe foothold for leg " + std::to_string(leg) + " near t=" +
                           std::to_string(t_mid) + " s within " + std::to_string(reach) + " m");
}

int Motion::stance_index(int leg, double t) const {
  const auto& st = stances_[leg];
  const auto it = std::upper_bound(st.begin(), st.end(), t,
                                   [](double v, const Stance& s) { return v < s.t_begin; });
  return static_cast<int>(it - st.begin()) - 1;
}

bool Motion::contact(int leg, double t) const {
  const int k = stance_index(leg, t);
  return k >= 0 && t < stances_[leg][k].t_end;
}

Vec3 Motion::foot(int leg, double t) const {
  const auto& st = stances_[leg];
  const int k = stance_index(leg, t);
  if (k < 0) return st.front().pos;
  if (t < st[k].t_end || k + 1 >= static_cast<int>(st.size())) return st[k].pos;
  const Stance& a = st[k];
  const Stance& b = st[k + 1];
  const double u = (t - a.t_end) / (b.t_begin - a.t_end);
  const double w = smooth(u);
  Vec3 out = a.pos + (b.pos - a.pos) * w;
  out.z() += gait_.swing_height * std::sin(M_PI * u);
  return out;
}

double Motion::air_time(int leg, double t) const {
  const int k = stance_index(leg, t);
  if (k < 0 || t < stances_[leg][k].t_end) return 0.0;
  return t - stances_[leg][k].t_end;
}

}  // namespace terramap::simkit
