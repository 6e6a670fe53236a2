// revkit/fft.hpp

// Copyright 2026  RevKit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef REVKIT_FFT_HPP_
#define REVKIT_FFT_HPP_

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "revkit/common.hpp"

namespace revkit {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 FFT.  n must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  require(n > 0 && (n & (n - 1)) == 0, "fft: size ", n,
          " is not a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::complex<double>& x : a) x *= inv_n;
  }
}

// Power spectrum bins 0..n/2 of a real frame zero-padded to length n.
inline std::vector<double> power_spectrum(const std::vector<double>& frame,
                                          std::size_t n) {
  require((n & (n - 1)) == 0 && n >= frame.size(),
          "power_spectrum: bad fft size ", n, " for frame of ", frame.size());
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  fft_inplace(buf, false);
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) out[k] = std::norm(buf[k]);
  return out;
}

// Full linear convolution, length |a|+|b|-1, via FFT (overlap-add over the
// longer input when it pays off, one big transform otherwise).
inline std::vector<double> convolve(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  require(!a.empty() && !b.empty(), "convolve: empty input");
  const std::vector<double>& sig = a.size() >= b.size() ? a : b;
  const std::vector<double>& ker = a.size() >= b.size() ? b : a;
  const std::size_t out_len = a.size() + b.size() - 1;
  std::vector<double> out(out_len, 0.0);

  const std::size_t m = ker.size();
  // Block size: at least 4x the kernel so the FFT work amortizes.
  std::size_t nfft = next_pow2(std::max<std::size_t>(256, 4 * m));
  if (nfft >= next_pow2(out_len)) {
    nfft = next_pow2(out_len);
    std::vector<std::complex<double>> fa(nfft), fb(nfft);
    for (std::size_t i = 0; i < sig.size(); ++i) fa[i] = sig[i];
    for (std::size_t i = 0; i < m; ++i) fb[i] = ker[i];
    fft_inplace(fa, false);
    fft_inplace(fb, false);
    for (std::size_t i = 0; i < nfft; ++i) fa[i] *= fb[i];
    fft_inplace(fa, true);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
    return out;
  }

  const std::size_t block = nfft - m + 1;
  std::vector<std::complex<double>> fker(nfft);
  for (std::size_t i = 0; i < m; ++i) fker[i] = ker[i];
  fft_inplace(fker, false);

  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t start = 0; start < sig.size(); start += block) {
    const std::size_t len = std::min(block, sig.size() - start);
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < len; ++i) buf[i] = sig[start + i];
    fft_inplace(buf, false);
    for (std::size_t i = 0; i < nfft; ++i) buf[i] *= fker[i];
    fft_inplace(buf, true);
    const std::size_t tail = std::min(len + m - 1, out_len - start);
    for (std::size_t i = 0; i < tail; ++i) out[start + i] += buf[i].real();
  }
  return out;
}

inline std::vector<float> convolve(const std::vector<float>& a,
                                   const std::vector<float>& b) {
  std::vector<double> da(a.begin(), a.end()), db(b.begin(), b.end());
  std::vector<double> res = convolve(da, db);
  return std::vector<float>(res.begin(), res.end());
}

}  // namespace revkit

#endif  // REVKIT_FFT_HPP_
