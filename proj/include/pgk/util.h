/**
 * util.h
 *
 * Copyright 2026. All Rights Reserved.
 */

#ifndef PGK_UTIL_H_
#define PGK_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace pgk {

using Rng = std::mt19937_64;

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);

uint64_t SplitMix64(uint64_t x);

/**
 * Derives an independent seed for a named sub-stream. All randomness in a run
 * flows from one root seed through this function, so a stage (or an example
 * within a stage) can be regenerated without replaying the others.
 */
uint64_t DeriveSeed(uint64_t root, std::string_view stream, uint64_t index = 0);

// Uniform double in [0, 1) from the top 53 bits. Portable across standard
// libraries, unlike std::uniform_real_distribution.
inline double UniformReal(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Uses rejection to avoid modulo bias.
uint64_t UniformInt(Rng& rng, uint64_t n);

std::string HexDigest(uint64_t value);

// Worker count from PGK_THREADS (unset or invalid: OpenMP default).
int ConfiguredThreads();
void ApplyThreadLimit();

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace pgk

#endif  // PGK_UTIL_H_
