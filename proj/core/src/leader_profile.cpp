#include "cthp/leader_profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cthp {

LeaderProfile LeaderProfile::constant(double v) {
  LeaderProfile lp;
  lp.kind_ = Kind::Constant;
  lp.base_ = v;
  return lp;
}

LeaderProfile LeaderProfile::step(double v_before, double v_after,
                                  double t_switch) {
  LeaderProfile lp;
  lp.kind_ = Kind::Step;
  lp.base_ = v_before;
  lp.step_to_ = v_after;
  lp.step_at_ = t_switch;
  return lp;
}

LeaderProfile LeaderProfile::sinusoid_after_hold(double base, double amplitude,
                                                 double omega, double hold) {
  LeaderProfile lp;
  lp.kind_ = Kind::SinusoidAfterHold;
  lp.base_ = base;
  lp.components_ = {Sine{amplitude, omega, 0.0}};
  lp.hold_ = hold;
  return lp;
}

LeaderProfile LeaderProfile::multi_sine(double base,
                                        std::vector<Sine> components) {
  LeaderProfile lp;
  lp.kind_ = Kind::MultiSine;
  lp.base_ = base;
  lp.components_ = std::move(components);
  return lp;
}

LeaderProfile LeaderProfile::sampled(std::vector<double> t,
                                     std::vector<double> v) {
  if (t.size() != v.size() || t.size() < 2)
    throw std::invalid_argument("sampled profile needs >= 2 matching samples");
  if (!std::is_sorted(t.begin(), t.end()))
    throw std::invalid_argument("sampled profile times must be increasing");
  LeaderProfile lp;
  lp.kind_ = Kind::Sampled;
  lp.sample_t_ = std::move(t);
  lp.sample_v_ = std::move(v);
  return lp;
}

LeaderProfile LeaderProfile::default_excitation() {
  return multi_sine(20.0, {Sine{1.5, 0.08, 0.0}, Sine{1.0, 0.22, 1.0},
                           Sine{0.5, 0.50, 2.4}});
}

double LeaderProfile::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return base_;
    case Kind::Step:
      return t < step_at_ ? base_ : step_to_;
    case Kind::SinusoidAfterHold: {
      if (t < hold_) return base_;
      const Sine& s = components_.front();
      return base_ + s.amplitude * std::sin(s.omega * (t - hold_));
    }
    case Kind::MultiSine: {
      double v = base_;
      for (const Sine& s : components_)
        v += s.amplitude * std::sin(s.omega * t + s.phase);
      return v;
    }
    case Kind::Sampled: {
      if (t <= sample_t_.front()) return sample_v_.front();
      if (t >= sample_t_.back()) return sample_v_.back();
      auto it = std::upper_bound(sample_t_.begin(), sample_t_.end(), t);
      const size_t i = static_cast<size_t>(it - sample_t_.begin());
      const double t0 = sample_t_[i - 1], t1 = sample_t_[i];
      const double w = (t - t0) / (t1 - t0);
      return (1.0 - w) * sample_v_[i - 1] + w * sample_v_[i];
    }
  }
  return base_;
}

std::string LeaderProfile::describe() const {
  std::ostringstream os;
  os.precision(15);
  switch (kind_) {
    case Kind::Constant:
      os << "constant:" << base_;
      break;
    case Kind::Step:
      os << "step:" << base_ << "," << step_to_ << "," << step_at_;
      break;
    case Kind::SinusoidAfterHold: {
      const Sine& s = components_.front();
      os << "sinhold:" << base_ << "," << s.amplitude << "," << s.omega << ","
         << hold_;
      break;
    }
    case Kind::MultiSine:
      os << "multisine:" << base_;
      for (const Sine& s : components_)
        os << "," << s.amplitude << ":" << s.omega << ":" << s.phase;
      break;
    case Kind::Sampled:
      os << "sampled:" << sample_t_.size() << " points";
      break;
  }
  return os.str();
}

namespace {

std::vector<double> parse_numbers(const std::string& body, char sep) {
  std::vector<double> out;
  std::istringstream is(body);
  std::string tok;
  while (std::getline(is, tok, sep)) {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size())
      throw std::invalid_argument("bad number in profile spec: " + tok);
    out.push_back(v);
  }
  return out;
}

}  // namespace

LeaderProfile LeaderProfile::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  try {
    if (kind == "constant") {
      const auto v = parse_numbers(body, ',');
      if (v.size() != 1) throw std::invalid_argument("constant:<v>");
      return constant(v[0]);
    }
    if (kind == "step") {
      const auto v = parse_numbers(body, ',');
      if (v.size() != 3) throw std::invalid_argument("step:<v0>,<v1>,<t>");
      return step(v[0], v[1], v[2]);
    }
    if (kind == "sinhold") {
      const auto v = parse_numbers(body, ',');
      if (v.size() != 4)
        throw std::invalid_argument("sinhold:<base>,<amp>,<omega>,<hold>");
      return sinusoid_after_hold(v[0], v[1], v[2], v[3]);
    }
    if (kind == "multisine") {
      std::istringstream is(body);
      std::string tok;
      if (!std::getline(is, tok, ',')) throw std::invalid_argument("empty");
      const double base = std::stod(tok);
      std::vector<Sine> comps;
      while (std::getline(is, tok, ',')) {
        const auto f = parse_numbers(tok, ':');
        if (f.size() != 3)
          throw std::invalid_argument("component is <amp>:<omega>:<phase>");
        comps.push_back(Sine{f[0], f[1], f[2]});
      }
      if (comps.empty()) throw std::invalid_argument("needs >= 1 component");
      return multi_sine(base, std::move(comps));
    }
    if (kind == "excite" && body.empty()) return default_excitation();
  } catch (const std::exception& e) {
    throw std::invalid_argument("leader profile '" + spec + "': " + e.what());
  }
  throw std::invalid_argument("unknown leader profile spec: " + spec);
}

}  // namespace cthp
