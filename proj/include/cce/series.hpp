#pragma once

// Truncated power series arithmetic used by the endpoint jet recursions.
// A series is the coefficient vector (c_0, ..., c_{n-1}); every operation
// truncates to the length of its first argument. Generic in the scalar type
// so that the recursions can also run in extended precision.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace cce::series {

template <class T>
using SeriesT = std::vector<T>;
using Series = SeriesT<double>;

template <class T>
SeriesT<T> constant(T c, int n) {
  SeriesT<T> s(n, T(0));
  if (n > 0) s[0] = c;
  return s;
}

/// Polynomial with the given leading coefficients, zero padded to length n.
template <class T>
SeriesT<T> poly(std::initializer_list<double> coeffs, int n) {
  SeriesT<T> s(n, T(0));
  int k = 0;
  for (double c : coeffs) {
    if (k < n) s[k] = T(c);
    ++k;
  }
  return s;
}

template <class T>
SeriesT<T> add(const SeriesT<T>& a, const SeriesT<T>& b) {
  SeriesT<T> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

template <class T>
SeriesT<T> sub(const SeriesT<T>& a, const SeriesT<T>& b) {
  SeriesT<T> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

template <class T>
SeriesT<T> scale(const SeriesT<T>& a, const T& f) {
  SeriesT<T> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = f * a[i];
  return c;
}

template <class T>
SeriesT<T> mul(const SeriesT<T>& a, const SeriesT<T>& b) {
  const std::size_t n = a.size();
  SeriesT<T> c(n, T(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) c[i] += a[j] * b[i - j];
  return c;
}

template <class T>
SeriesT<T> mul(const SeriesT<T>& a, const SeriesT<T>& b, const SeriesT<T>& c) {
  return mul(mul(a, b), c);
}

/// Term-wise derivative d/dt; the top coefficient becomes 0.
template <class T>
SeriesT<T> der(const SeriesT<T>& a) {
  const std::size_t n = a.size();
  SeriesT<T> d(n, T(0));
  for (std::size_t k = 1; k < n; ++k) d[k - 1] = T(static_cast<double>(k)) * a[k];
  return d;
}

/// exp(a) via e' = e a'.
template <class T>
SeriesT<T> exp(const SeriesT<T>& a) {
  using std::exp;
  const std::size_t n = a.size();
  SeriesT<T> e(n, T(0));
  if (n == 0) return e;
  const SeriesT<T> da = der(a);
  e[0] = exp(a[0]);
  for (std::size_t k = 1; k < n; ++k) {
    T s(0);
    for (std::size_t j = 0; j < k; ++j) s += e[j] * da[k - 1 - j];
    e[k] = s / T(static_cast<double>(k));
  }
  return e;
}

/// exp(c1*a + c2*b + c3*c) for scalar weights (pass exact rationals as T).
template <class T>
SeriesT<T> exp_lin(const T& c1, const SeriesT<T>& a, const T& c2, const SeriesT<T>& b,
                   const T& c3, const SeriesT<T>& c) {
  SeriesT<T> s(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    s[i] = c1 * a[i] + c2 * b[i] + c3 * c[i];
  return exp(s);
}

/// Value, first and second derivative of sum c_k t^k (Horner).
template <class T>
void evaluate(const SeriesT<T>& a, T t, T& value, T& slope, T& curvature) {
  T v(0), d(0), dd(0);
  for (std::size_t k = a.size(); k-- > 0;) {
    dd = dd * t + T(2) * d;
    d = d * t + v;
    v = v * t + a[k];
  }
  value = v;
  slope = d;
  curvature = dd;
}

}  // namespace cce::series
