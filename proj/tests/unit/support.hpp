#pragma once

#include "privml/paillier.hpp"
#include "privml/random.hpp"

namespace privml::test {

inline constexpr std::size_t kTestBits = 512;

// Keys are generated once per process from fixed seeds.
inline const paillier::Keypair& client_keys() {
  static InsecureSeededRandom rng(0xC11E);
  static const auto keys = paillier::generate_keypair(kTestBits, rng);
  return keys;
}

inline const paillier::Keypair& server_keys() {
  static InsecureSeededRandom rng(0x5E7E);
  static const auto keys = paillier::generate_keypair(kTestBits, rng);
  return keys;
}

inline RandomSource& rng() {
  static InsecureSeededRandom r(20261016);
  return r;
}

}  // namespace privml::test
