#ifndef HSSMF_SCALAR_HPP
#define HSSMF_SCALAR_HPP

#include <cmath>
#include <complex>
#include <type_traits>

namespace hssmf {

  // scalar abstraction: everything numerical is templated on scalar_t and
  // goes through these helpers, so a complex instantiation only needs this
  // file to be right.

  template<typename scalar_t> struct RealType { using type = scalar_t; };
  template<typename T> struct RealType<std::complex<T>> { using type = T; };
  template<typename scalar_t>
  using real_t = typename RealType<scalar_t>::type;

  template<typename scalar_t>
  inline constexpr bool is_complex_v = !std::is_same_v<scalar_t, real_t<scalar_t>>;

  template<typename scalar_t>
  inline scalar_t conj_val(scalar_t x) {
    if constexpr (is_complex_v<scalar_t>) return std::conj(x);
    else return x;
  }

  template<typename scalar_t>
  inline real_t<scalar_t> abs_val(scalar_t x) {
    using std::abs;
    return abs(x);
  }

  template<typename scalar_t>
  inline real_t<scalar_t> abs2_val(scalar_t x) {
    if constexpr (is_complex_v<scalar_t>) return std::norm(x);
    else return x * x;
  }

  // op applied to a matrix argument in a kernel call
  enum class Trans : char { N = 'N', T = 'T', C = 'C' };
  enum class Side  : char { L = 'L', R = 'R' };
  enum class UpLo  : char { L = 'L', U = 'U' };
  enum class Diag  : char { N = 'N', U = 'U' };

  inline Trans flip(Trans t) { return t == Trans::N ? Trans::C : Trans::N; }

  template<typename scalar_t>
  inline scalar_t op_val(Trans t, scalar_t x) {
    return t == Trans::C ? conj_val(x) : x;
  }

} // namespace hssmf

#endif
