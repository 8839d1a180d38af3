/**
 * util.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/util.h"

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pgk {

uint64_t Fnv1a64(std::string_view bytes, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t root, std::string_view stream, uint64_t index) {
  return SplitMix64(SplitMix64(root ^ Fnv1a64(stream)) + index);
}

uint64_t UniformInt(Rng& rng, uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformInt(): empty range.");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

std::string HexDigest(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

int ConfiguredThreads() {
  const char* env = std::getenv("PGK_THREADS");
  if (env == nullptr) return omp_get_max_threads();
  const int n = std::atoi(env);
  return n > 0 ? n : omp_get_max_threads();
}

void ApplyThreadLimit() { omp_set_num_threads(ConfiguredThreads()); }

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("ReadFile(): Unable to open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("WriteFile(): Unable to open " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("WriteFile(): Write failed for " + path);
}

}  // namespace pgk
