#pragma once

#include <stdexcept>
#include <type_traits>

#if defined(OPALAB_HAVE_MPFR)
#include <boost/multiprecision/mpfr.hpp>
#endif

namespace opalab {

#if defined(OPALAB_HAVE_MPFR)
namespace mp = boost::multiprecision;
using float128_t = mp::number<mp::mpfr_float_backend<38>, mp::et_off>;   // ~128 bits
using float256_t = mp::number<mp::mpfr_float_backend<77>, mp::et_off>;   // ~256 bits
using float512_t = mp::number<mp::mpfr_float_backend<154>, mp::et_off>;  // ~512 bits
#endif

inline bool precision_bits_supported(int bits) {
#if defined(OPALAB_HAVE_MPFR)
    return bits == 53 || bits == 128 || bits == 256 || bits == 512;
#else
    return bits == 53;
#endif
}

/// Invokes fn with a std::type_identity tag of the scalar matching the
/// requested mantissa width. All instantiations must return the same type.
template <class Fn>
decltype(auto) with_real_type(int bits, Fn&& fn) {
    switch (bits) {
        case 53:
            return fn(std::type_identity<double>{});
#if defined(OPALAB_HAVE_MPFR)
        case 128:
            return fn(std::type_identity<float128_t>{});
        case 256:
            return fn(std::type_identity<float256_t>{});
        case 512:
            return fn(std::type_identity<float512_t>{});
#endif
        default:
            throw std::domain_error("precision_bits must be one of 53, 128, 256, 512");
    }
}

}  // namespace opalab
