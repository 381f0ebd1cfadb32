#include "esum/pslq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace esum {

namespace {

Integer nearest(const HPReal& x) { return round_to_integer(x); }

}  // namespace

PslqOutcome pslq(const std::vector<HPReal>& xin, long digits, const Integer& max_height) {
  PslqOutcome out;
  const size_t n = xin.size();
  if (n < 2) throw std::invalid_argument("pslq needs at least two values");
  for (const auto& v : xin)
    if (v.is_zero()) throw std::invalid_argument("pslq inputs must be nonzero");
  const long bits = working_bits(digits);
  const HPReal tol = ten_pow(-(digits * 3) / 4, bits);
  const HPReal gam = sqrt(HPReal(Rational(4, 3), bits));

  std::vector<HPReal> x;
  for (const auto& v : xin) x.push_back(v.with_prec(bits));

  std::vector<std::vector<Integer>> A(n, std::vector<Integer>(n, 0)), B(n, std::vector<Integer>(n, 0));
  for (size_t i = 0; i < n; ++i) A[i][i] = B[i][i] = 1;

  std::vector<HPReal> s(n, HPReal(bits));
  for (size_t k = 0; k < n; ++k) {
    HPReal acc(bits);
    for (size_t j = k; j < n; ++j) acc += x[j] * x[j];
    s[k] = sqrt(acc);
  }
  HPReal t = s[0];
  std::vector<HPReal> y(n, HPReal(bits));
  for (size_t k = 0; k < n; ++k) {
    y[k] = x[k] / t;
    s[k] = s[k] / t;
  }
  std::vector<std::vector<HPReal>> H(n, std::vector<HPReal>(n - 1, HPReal(bits)));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < std::min(i, n - 1); ++j) H[i][j] = HPReal(0, bits) - y[i] * y[j] / (s[j] * s[j + 1]);
    if (i < n - 1) H[i][i] = s[i + 1] / s[i];
  }
  auto reduce_row = [&](size_t i, size_t jmax) {
    for (size_t jj = jmax + 1; jj-- > 0;) {
      if (H[jj][jj].is_zero()) continue;
      Integer q = nearest(H[i][jj] / H[jj][jj]);
      if (q == 0) continue;
      HPReal qr(q, bits);
      y[jj] += qr * y[i];
      for (size_t k = 0; k <= jj; ++k) H[i][k] -= qr * H[jj][k];
      for (size_t k = 0; k < n; ++k) {
        A[i][k] -= q * A[jj][k];
        B[k][jj] += q * B[k][i];
      }
    }
  };
  for (size_t i = 1; i < n; ++i) reduce_row(i, i - 1);

  const long max_iter = 100000;
  for (long it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    size_t m = 0;
    HPReal best(-1, bits);
    HPReal g = gam;
    for (size_t i = 0; i + 1 < n; ++i) {
      HPReal v = g * abs(H[i][i]);
      if (v > best) {
        best = v;
        m = i;
      }
      g *= gam;
    }
    std::swap(y[m], y[m + 1]);
    std::swap(A[m], A[m + 1]);
    for (size_t k = 0; k < n; ++k) std::swap(B[k][m], B[k][m + 1]);
    std::swap(H[m], H[m + 1]);
    if (m + 2 < n) {
      HPReal t0 = sqrt(H[m][m] * H[m][m] + H[m][m + 1] * H[m][m + 1]);
      if (t0.is_zero()) {
        out.diagnostics = "degenerate step";
        break;
      }
      HPReal t1 = H[m][m] / t0, t2 = H[m][m + 1] / t0;
      for (size_t i = m; i < n; ++i) {
        HPReal t3 = H[i][m], t4 = H[i][m + 1];
        H[i][m] = t1 * t3 + t2 * t4;
        H[i][m + 1] = t1 * t4 - t2 * t3;
      }
    }
    for (size_t i = m + 1; i < n; ++i) reduce_row(i, std::min(i - 1, m + 1));

    for (size_t i = 0; i < n; ++i) {
      if (abs(y[i]) < tol) {
        std::vector<Integer> r(n);
        Integer h = 0;
        for (size_t j = 0; j < n; ++j) {
          r[j] = B[j][i];
          h = std::max<Integer>(h, abs(r[j]));
        }
        if (h != 0 && h <= max_height) {
          out.relation = r;
          return out;
        }
      }
    }
    HPReal hmax(0, bits);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j + 1 < n; ++j) hmax = max(hmax, abs(H[i][j]));
    if (hmax.is_zero()) {
      out.diagnostics = "precision exhausted";
      break;
    }
    // Any relation has norm at least 1/max|H|.
    if (HPReal(1, bits) / hmax > HPReal(max_height, bits) * sqrt(HPReal(static_cast<long>(n), bits))) {
      out.diagnostics = "no relation within height bound";
      break;
    }
  }
  if (out.diagnostics.empty()) out.diagnostics = "iteration limit";
  return out;
}

std::vector<std::string> default_basis_atoms() { return {"z2", "z3", "z4", "z5", "z6", "z7"}; }

std::vector<Expr> weight_basis(int weight, const std::vector<std::string>& atoms) {
  std::vector<std::pair<std::string, int>> av;
  for (const auto& a : atoms) {
    const AtomInfo* info = find_atom(a);
    if (!info) throw std::invalid_argument("unknown atom '" + a + "'");
    av.emplace_back(a, info->weight);
  }
  std::set<std::string> seen;
  std::vector<Expr> out;
  std::map<std::string, int> cur;
  std::function<void(size_t, int)> rec = [&](size_t i, int rem) {
    if (rem == 0) {
      int even = 0;
      Expr e = Expr::constant(Rational(1));
      for (const auto& [a, pw] : cur) {
        if (a == "z2" || a == "z4" || a == "z6") {
          even += find_atom(a)->weight * pw;
          continue;
        }
        e = e * parse_expression(a).pow(pw);
      }
      while (even > 6) {
        e = e * parse_expression("z6");
        even -= 6;
      }
      if (even > 0) e = e * parse_expression("z" + std::to_string(even));
      if (seen.insert(e.str()).second) out.push_back(e);
      return;
    }
    if (i >= av.size()) return;
    for (int pw = 0; pw * av[i].second <= rem; ++pw) {
      if (pw) cur[av[i].first] = pw;
      rec(i + 1, rem - pw * av[i].second);
      cur.erase(av[i].first);
    }
  };
  rec(0, weight);
  std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return a.str() < b.str(); });
  return out;
}

long detection_digits(size_t basis_size) { return 20 + 12 * static_cast<long>(basis_size); }

Discovery discover(const SumDescriptor& d, const std::vector<Expr>& basis, const Integer& max_height,
                   std::optional<long> digits) {
  Discovery res;
  if (basis.empty()) throw std::invalid_argument("empty basis");
  res.digits = digits.value_or(detection_digits(basis.size()));
  EvalConfig cfg;
  cfg.digits = res.digits + 5;
  double per_term = std::log10(static_cast<double>(cfg.K));
  cfg.B = std::max(cfg.B, static_cast<int>(std::ceil((cfg.digits + 10) / per_term)) + 4);
  EvalResult target = global_evaluator().evaluate(d, cfg);
  std::vector<HPReal> x{target.value};
  for (const auto& b : basis) x.push_back(eval_numeric(b, cfg).value);
  PslqOutcome o = pslq(x, res.digits, max_height);
  res.diagnostics = o.diagnostics;
  if (!o.relation || (*o.relation)[0] == 0) {
    if (o.relation) res.diagnostics = "relation does not involve the sum";
    return res;
  }
  const auto& r = *o.relation;
  Expr cf;
  for (size_t i = 0; i < basis.size(); ++i) {
    if (r[i + 1] == 0) continue;
    Rational c(-r[i + 1], r[0]);
    c.canonicalize();
    cf += basis[i] * c;
  }
  HPReal v = eval_numeric(cf, cfg).value;
  res.residual = std::fabs((v - target.value).to_double());
  res.found = true;
  res.closed_form = cf;
  res.relation = r;
  return res;
}

}  // namespace esum
