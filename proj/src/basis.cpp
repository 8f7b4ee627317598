#include "mrdg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace mrdg
{
namespace
{
using Poly = std::vector<double>;

Poly poly_mul(Poly const &a, Poly const &b)
{
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] += a[i] * b[j];
  return r;
}

Poly poly_add(Poly a, Poly const &b, double scale)
{
  if (a.size() < b.size())
    a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    a[i] += scale * b[i];
  return a;
}

// p(shift + scale * s) as a polynomial in s
Poly poly_affine(Poly const &p, double shift, double scale)
{
  Poly result{0.0};
  Poly power{1.0};
  Poly const lin{shift, scale};
  for (double c : p)
  {
    result = poly_add(result, power, c);
    power  = poly_mul(power, lin);
  }
  return result;
}

double poly_eval(std::span<const double> p, double s, int deriv)
{
  double r = 0.0;
  for (int i = static_cast<int>(p.size()) - 1; i >= deriv; --i)
  {
    double c = p[i];
    for (int q = 0; q < deriv; ++q)
      c *= (i - q);
    r = r * s + c;
  }
  return r;
}

// integral over [0,1] of the product of two local monomial expansions
double poly_inner(Poly const &a, Poly const &b)
{
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r += a[i] * b[j] / static_cast<double>(i + j + 1);
  return r;
}

// monomial coefficients (in x) of P_n(2x - 1)
Poly shifted_legendre_poly(int n)
{
  Poly prev{1.0};
  if (n == 0)
    return prev;
  Poly const t{-1.0, 2.0};
  Poly cur = t;
  for (int m = 1; m < n; ++m)
  {
    Poly next = poly_add(poly_mul(t, cur), Poly{}, 0.0);
    for (double &c : next)
      c *= (2.0 * m + 1.0) / (m + 1.0);
    next = poly_add(next, prev, -static_cast<double>(m) / (m + 1.0));
    prev = std::move(cur);
    cur  = std::move(next);
  }
  return cur;
}

// two-piece function on {[0,1/2],[1/2,1]} stored as local polynomials
struct TwoPiece
{
  std::array<Poly, 2> piece;
};

double inner(TwoPiece const &a, TwoPiece const &b)
{
  return 0.5 * (poly_inner(a.piece[0], b.piece[0]) +
                poly_inner(a.piece[1], b.piece[1]));
}

void axpy(TwoPiece &y, TwoPiece const &x, double alpha)
{
  for (int p = 0; p < 2; ++p)
    y.piece[p] = poly_add(y.piece[p], x.piece[p], alpha);
}

} // namespace

QuadRule gauss_rule(int n)
{
  if (n < 1 || n > 10)
    throw std::invalid_argument("gauss_rule: node count must be in [1, 10], got " +
                                std::to_string(n));
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i)
  {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it)
    {
      double const dt = legendre(n, t) / legendre_deriv(n, t);
      t -= dt;
      if (std::abs(dt) < 1e-16)
        break;
    }
    double const dp = legendre_deriv(n, t);
    // ascending order on [0,1]
    rule.nodes[n - 1 - i]   = 0.5 * (t + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return rule;
}

double legendre(int n, double t)
{
  if (n == 0)
    return 1.0;
  double p0 = 1.0, p1 = t;
  for (int m = 1; m < n; ++m)
  {
    double const p2 = ((2.0 * m + 1.0) * t * p1 - m * p0) / (m + 1.0);
    p0              = p1;
    p1              = p2;
  }
  return p1;
}

double legendre_deriv(int n, double t)
{
  if (n == 0)
    return 0.0;
  // (1 - t^2) P_n' = n (P_{n-1} - t P_n), with the endpoint limit n(n+1)/2
  if (std::abs(std::abs(t) - 1.0) < 1e-14)
    return (t > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0)) * 0.5 * n * (n + 1.0);
  return n * (legendre(n - 1, t) - t * legendre(n, t)) / (1.0 - t * t);
}

PiecewisePoly1D::PiecewisePoly1D(std::vector<double> breakpoints,
                                 std::vector<std::vector<double>> coeffs)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs))
{
  if (breakpoints_.size() != coeffs_.size() + 1 || breakpoints_.front() != 0.0 ||
      breakpoints_.back() != 1.0)
    throw std::invalid_argument("PiecewisePoly1D: pieces must tile [0,1]");
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
    throw std::invalid_argument("PiecewisePoly1D: breakpoints must be increasing");
}

int PiecewisePoly1D::degree() const
{
  int d = 0;
  for (auto const &c : coeffs_)
    d = std::max(d, static_cast<int>(c.size()) - 1);
  return d;
}

double PiecewisePoly1D::eval_piece(int piece, double s, int deriv) const
{
  double const w = breakpoints_[piece + 1] - breakpoints_[piece];
  return poly_eval(coeffs_[piece], s, deriv) * std::pow(1.0 / w, deriv);
}

double PiecewisePoly1D::eval(double x, int deriv, Side side) const
{
  if (x < 0.0 || x > 1.0)
    return 0.0;
  if ((side == Side::left && x == 0.0) || (side == Side::right && x == 1.0))
    return 0.0;
  int p = 0;
  int const n = num_pieces();
  if (side == Side::right)
    while (p + 1 < n && x >= breakpoints_[p + 1])
      ++p;
  else
    while (p + 1 < n && x > breakpoints_[p + 1])
      ++p;
  double const a = breakpoints_[p], b = breakpoints_[p + 1];
  return eval_piece(p, (x - a) / (b - a), deriv);
}

double PiecewisePoly1D::operator()(double x) const
{
  return eval(x, 0, x >= 1.0 ? Side::left : Side::right);
}

PiecewisePoly1D legendre_scaling(int i)
{
  if (i < 0 || i > max_degree)
    throw std::out_of_range("legendre_scaling: degree index out of range");
  Poly p = shifted_legendre_poly(i);
  for (double &c : p)
    c *= std::sqrt(2.0 * i + 1.0);
  return PiecewisePoly1D({0.0, 1.0}, {p});
}

std::vector<PiecewisePoly1D> alpert_wavelets(int k)
{
  if (k < 0 || k > max_degree)
    throw std::out_of_range("alpert_wavelets: degree out of range");

  // scaling functions restricted to the two halves, x = (s + p) / 2
  std::vector<TwoPiece> scaling(k + 1);
  for (int i = 0; i <= k; ++i)
  {
    Poly p = shifted_legendre_poly(i);
    for (double &c : p)
      c *= std::sqrt(2.0 * i + 1.0);
    scaling[i].piece[0] = poly_affine(p, 0.0, 0.5);
    scaling[i].piece[1] = poly_affine(p, 0.5, 0.5);
  }

  std::vector<TwoPiece> wave;
  for (int m = 0; m <= k; ++m)
  {
    TwoPiece h;
    h.piece[0] = Poly{0.0};
    h.piece[1] = Poly(m + 1, 0.0);
    h.piece[1][m] = 1.0;
    // two passes of classical Gram-Schmidt against V_0 and earlier wavelets
    for (int pass = 0; pass < 2; ++pass)
    {
      for (auto const &s : scaling)
        axpy(h, s, -inner(h, s));
      for (auto const &w : wave)
        axpy(h, w, -inner(h, w));
    }
    double const nrm = std::sqrt(inner(h, h));
    for (auto &p : h.piece)
      for (double &c : p)
        c /= nrm;
    // sign: highest-degree significant coefficient on the right piece > 0
    Poly const &r = h.piece[1];
    for (int d = static_cast<int>(r.size()) - 1; d >= 0; --d)
    {
      if (std::abs(r[d]) > 1e-8)
      {
        if (r[d] < 0)
          for (auto &p : h.piece)
            for (double &c : p)
              c = -c;
        break;
      }
    }
    wave.push_back(std::move(h));
  }

  std::vector<PiecewisePoly1D> out;
  for (auto &w : wave)
  {
    for (auto &p : w.piece)
      p.resize(k + 1, 0.0);
    out.emplace_back(std::vector<double>{0.0, 0.5, 1.0},
                     std::vector<std::vector<double>>{w.piece[0], w.piece[1]});
  }
  return out;
}

AlpertBasis::AlpertBasis(int k) : k_(k), wavelets_(alpert_wavelets(k))
{
  for (int i = 0; i <= k; ++i)
    scaling_.push_back(legendre_scaling(i));
}

AlpertBasis const &AlpertBasis::get(int k)
{
  static std::array<AlpertBasis, max_degree + 1> const cache{
      AlpertBasis(0), AlpertBasis(1), AlpertBasis(2), AlpertBasis(3)};
  if (k < 0 || k > max_degree)
    throw std::out_of_range("AlpertBasis: degree out of range");
  return cache[k];
}

double AlpertBasis::eval(int i, int level, int cell, double x, int deriv,
                         Side side) const
{
  if (i < 0 || i > k_ || level < 0 || cell < 0 || cell >= cells_at_level(level))
    throw std::out_of_range("AlpertBasis::eval: index out of range");
  if (level == 0)
    return scaling_[i].eval(x, deriv, side);
  double const n = static_cast<double>(1 << (level - 1));
  double const t = n * x - cell;
  return std::sqrt(n) * std::pow(n, deriv) * wavelets_[i].eval(t, deriv, side);
}

double AlpertBasis::operator()(int i, int level, int cell, double x) const
{
  return eval(i, level, cell, x, 0, x >= 1.0 ? Side::left : Side::right);
}

InterpBasis::InterpBasis(int k) : k_(k)
{
  if (k < 1 || k > max_degree)
    throw std::invalid_argument("InterpBasis: supported degrees are 1..3");
  // subsets of (0,1) closed under x -> 2x mod 1, chosen for small Lebesgue
  // constants (3, 11, 9)
  switch (k)
  {
  case 1:
    nodes0_ = {1.0 / 3.0, 2.0 / 3.0};
    break;
  case 2:
    nodes0_ = {1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0};
    break;
  default:
    nodes0_ = {1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0};
    break;
  }

  struct Candidate
  {
    double local;
    int half;
    int source;
  };
  std::vector<Candidate> cand;
  for (int half = 0; half < 2; ++half)
    for (int q = 0; q <= k; ++q)
    {
      double const x = 0.5 * (nodes0_[q] + half);
      bool const old = std::any_of(nodes0_.begin(), nodes0_.end(),
                                   [&](double y) { return std::abs(x - y) < 1e-13; });
      if (!old)
        cand.push_back({x, half, q});
    }
  std::sort(cand.begin(), cand.end(),
            [](auto const &a, auto const &b) { return a.local < b.local; });
  if (static_cast<int>(cand.size()) != k + 1)
    throw std::logic_error("InterpBasis: node family is not nested");
  for (auto const &c : cand)
  {
    new_local_.push_back(c.local);
    new_half_.push_back(c.half);
    new_source_.push_back(c.source);
  }

  for (int q = 0; q <= k; ++q)
  {
    Poly p{1.0};
    for (int m = 0; m <= k; ++m)
    {
      if (m == q)
        continue;
      double const d = nodes0_[q] - nodes0_[m];
      p              = poly_mul(p, Poly{-nodes0_[m] / d, 1.0 / d});
    }
    lagrange_coeffs_.push_back(std::move(p));
  }
}

InterpBasis const &InterpBasis::get(int k)
{
  static std::array<InterpBasis, max_degree> const cache{
      InterpBasis(1), InterpBasis(2), InterpBasis(3)};
  if (k < 1 || k > max_degree)
    throw std::invalid_argument("InterpBasis: supported degrees are 1..3");
  return cache[k - 1];
}

double InterpBasis::lagrange(int q, double s) const
{
  return poly_eval(lagrange_coeffs_[q], s, 0);
}

double InterpBasis::node(int level, int cell, int p) const
{
  if (level == 0)
    return nodes0_[p];
  double const w = 1.0 / cells_at_level(level);
  return (cell + new_local_[p]) * w;
}

std::vector<double> InterpBasis::nodes_at_level(int level) const
{
  std::vector<double> out;
  int const n = 1 << level;
  for (int c = 0; c < n; ++c)
    for (double s : nodes0_)
      out.push_back((c + s) / n);
  std::sort(out.begin(), out.end());
  return out;
}

double InterpBasis::operator()(int p, int level, int cell, double x) const
{
  if (level == 0)
    return (x >= 0.0 && x <= 1.0) ? lagrange(p, x) : 0.0;
  double const n = static_cast<double>(1 << level);
  double const s = n * x - (2.0 * cell + new_half_[p]);
  if (s < 0.0 || s >= 1.0)
    return 0.0;
  return lagrange(new_source_[p], s);
}

double cell_legendre(int m, int level, int cell, double x)
{
  double const n = static_cast<double>(1 << level);
  double const s = n * x - cell;
  if (s < 0.0 || s > 1.0)
    return 0.0;
  return std::sqrt(n) * std::sqrt(2.0 * m + 1.0) * legendre(m, 2.0 * s - 1.0);
}

BasisTables::BasisTables(int k, int max_level)
    : k_(k), max_level_(max_level), num_elements_(1 << max_level)
{
  if (max_level < 0 || max_level > 20)
    throw std::out_of_range("BasisTables: max level out of range");
  auto const &alpert = AlpertBasis::get(k);
  auto const &interp = InterpBasis::get(k);
  int const kp = k + 1;
  int const L  = max_level + 1;

  nodes_.resize(static_cast<std::size_t>(num_elements_) * kp);
  alpert_nodes_.assign(static_cast<std::size_t>(num_elements_) * kp * L * kp, 0.0);
  chain_cells_.assign(static_cast<std::size_t>(num_elements_) * kp * L, 0);
  interp_anc_.assign(static_cast<std::size_t>(num_elements_) * L * kp * kp, 0.0);
  gram_anc_.assign(static_cast<std::size_t>(num_elements_) * L * kp * kp, 0.0);

  QuadRule const quad = gauss_rule(k + 2);

  for (int e = 0; e < num_elements_; ++e)
  {
    auto const [lev, cell] = element1d(e);
    for (int p = 0; p < kp; ++p)
    {
      double const x    = interp.node(lev, cell, p);
      nodes_[e * kp + p] = x;
      for (int l = 0; l < L; ++l)
      {
        int const j = cell_containing(l, x);
        chain_cells_[(static_cast<std::size_t>(e) * kp + p) * L + l] = j;
        auto const off = ((static_cast<std::size_t>(e) * kp + p) * L + l) * kp;
        for (int i = 0; i < kp; ++i)
          alpert_nodes_[off + i] = alpert(i, l, j, x);
      }
      for (int a = 0; a < lev; ++a)
      {
        int const ja   = ancestor_cell(lev, cell, a);
        auto const off = (static_cast<std::size_t>(e) * L + a) * kp * kp;
        for (int ip = 0; ip < kp; ++ip)
          interp_anc_[off + p * kp + ip] = interp(ip, a, ja, x);
      }
    }

    // Gram blocks: each interpolatory function lives on a single cell that
    // sits inside one polynomial piece of every coarser Alpert function.
    for (int ip = 0; ip < kp; ++ip)
    {
      double lo, hi;
      if (lev == 0)
      {
        lo = 0.0;
        hi = 1.0;
      }
      else
      {
        // support half of function ip: evaluate at its node to locate it
        double const x = interp.node(lev, cell, ip);
        double const w = 1.0 / (1 << lev);
        lo             = std::floor(x / w) * w;
        hi             = lo + w;
      }
      for (int a = 0; a <= lev; ++a)
      {
        int const ja   = ancestor_cell(lev, cell, a);
        auto const off = (static_cast<std::size_t>(e) * L + a) * kp * kp;
        for (int i = 0; i < kp; ++i)
        {
          double s = 0.0;
          for (std::size_t q = 0; q < quad.nodes.size(); ++q)
          {
            double const x = lo + (hi - lo) * quad.nodes[q];
            s += quad.weights[q] * (hi - lo) * alpert(i, a, ja, x) *
                 interp(ip, lev, cell, x);
          }
          gram_anc_[off + i * kp + ip] = s;
        }
      }
    }
  }

  // two-scale filters from the (0,0) -> (1,0) relation
  for (auto &f : filters_)
    f.assign(static_cast<std::size_t>(kp) * kp, 0.0);
  for (int i = 0; i < kp; ++i)
    for (int m = 0; m < kp; ++m)
      for (int half = 0; half < 2; ++half)
      {
        double sh = 0.0, sg = 0.0;
        for (std::size_t q = 0; q < quad.nodes.size(); ++q)
        {
          double const x   = 0.5 * (half + quad.nodes[q]);
          double const w   = 0.5 * quad.weights[q];
          double const chi = cell_legendre(m, 1, half, x);
          sh += w * alpert(i, 0, 0, x) * chi;
          sg += w * alpert(i, 1, 0, x) * chi;
        }
        filters_[half][i * kp + m]     = sh;
        filters_[2 + half][i * kp + m] = sg;
      }
}

std::shared_ptr<BasisTables const> BasisTables::get(int k, int max_level)
{
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<BasisTables const>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[{k, max_level}];
  if (!slot)
    slot = std::make_shared<BasisTables const>(k, max_level);
  return slot;
}

} // namespace mrdg
