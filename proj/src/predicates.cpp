#include "femgraph/predicates.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace femgraph::predicates {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kInCircleBound = (10.0 + 96.0 * kEps) * kEps;

// Nonoverlapping floating-point expansion, components in increasing
// magnitude. Only used on the slow path, so clarity wins over speed.
class Expansion {
 public:
  Expansion() = default;
  explicit Expansion(double v) {
    if (v != 0.0) terms_.push_back(v);
  }

  static Expansion diff(double a, double b) {
    const double x = a - b;
    const double bv = a - x;
    const double av = x + bv;
    const double br = bv - b;
    const double ar = a - av;
    Expansion e;
    e.push(ar + br);
    e.push(x);
    return e;
  }

  static Expansion product(double a, double b) {
    const double x = a * b;
    Expansion e;
    e.push(std::fma(a, b, -x));
    e.push(x);
    return e;
  }

  Expansion& grow(double b) {
    std::vector<double> out;
    out.reserve(terms_.size() + 1);
    double q = b;
    for (double t : terms_) {
      const double x = q + t;
      const double bv = x - q;
      const double av = x - bv;
      const double err = (q - av) + (t - bv);
      if (err != 0.0) out.push_back(err);
      q = x;
    }
    if (q != 0.0) out.push_back(q);
    terms_ = std::move(out);
    return *this;
  }

  Expansion operator+(const Expansion& o) const {
    Expansion r = *this;
    for (double t : o.terms_) r.grow(t);
    return r;
  }

  Expansion operator-() const {
    Expansion r = *this;
    for (double& t : r.terms_) t = -t;
    return r;
  }

  Expansion operator-(const Expansion& o) const { return *this + (-o); }

  Expansion operator*(const Expansion& o) const {
    Expansion r;
    for (double a : terms_) {
      for (double b : o.terms_) r = r + product(a, b);
    }
    return r;
  }

  double sign() const {
    if (terms_.empty()) return 0.0;
    return terms_.back() > 0.0 ? 1.0 : -1.0;
  }

 private:
  void push(double v) {
    if (v != 0.0) terms_.push_back(v);
  }
  std::vector<double> terms_;
};

double orient_exact(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c) {
  const Expansion acx = Expansion::diff(a.x(), c.x());
  const Expansion acy = Expansion::diff(a.y(), c.y());
  const Expansion bcx = Expansion::diff(b.x(), c.x());
  const Expansion bcy = Expansion::diff(b.y(), c.y());
  return (acx * bcy - acy * bcx).sign();
}

double incircle_exact(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                      const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  const Expansion adx = Expansion::diff(a.x(), d.x());
  const Expansion ady = Expansion::diff(a.y(), d.y());
  const Expansion bdx = Expansion::diff(b.x(), d.x());
  const Expansion bdy = Expansion::diff(b.y(), d.y());
  const Expansion cdx = Expansion::diff(c.x(), d.x());
  const Expansion cdy = Expansion::diff(c.y(), d.y());

  const Expansion alift = adx * adx + ady * ady;
  const Expansion blift = bdx * bdx + bdy * bdy;
  const Expansion clift = cdx * cdx + cdy * cdy;

  const Expansion det = alift * (bdx * cdy - cdx * bdy) +
                        blift * (cdx * ady - adx * cdy) +
                        clift * (adx * bdy - bdx * ady);
  return det.sign();
}

}  // namespace

double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                const Eigen::Vector2d& c) {
  const double left = (a.x() - c.x()) * (b.y() - c.y());
  const double right = (a.y() - c.y()) * (b.x() - c.x());
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound || -det > bound) return det;
  return orient_exact(a, b, c);
}

double incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;

  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent =
      (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
      (std::abs(cdxady) + std::abs(adxcdy)) * blift +
      (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kInCircleBound * permanent;
  if (det > bound || -det > bound) return det;
  return incircle_exact(a, b, c, d);
}

}  // namespace femgraph::predicates
