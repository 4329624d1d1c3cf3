#pragma once

#include <cstddef>
#include <string>
#include <vector>

/// Closed-form message sizes, counted in ciphertexts (2 l_M bits), public
/// keys (l_M bits) and plaintext scalars (l_M bits).
namespace privml::bandwidth {

struct Flow {
  std::size_t ciphertexts = 0;
  std::size_t keys = 0;
  std::size_t scalars = 0;

  std::size_t bits(std::size_t l_m) const { return (2 * ciphertexts + keys + scalars) * l_m; }
  /// Ciphertext portion only.
  std::size_t ciphertext_bits(std::size_t l_m) const { return 2 * ciphertexts * l_m; }
};

struct Estimate {
  std::string protocol;
  Flow up;    // client -> server
  Flow down;  // server -> client
  /// Per-unit or per-layer rows say so here.
  std::string unit;
};

/// pk_C and d ciphertexts up, one ciphertext down.
Estimate regr_core(std::size_t d);
/// Publication: pk_S and d + 1 ciphertexts.
Estimate publish(std::size_t d);
/// One ciphertext up, one scalar down.
Estimate regr_dual();
/// t* and ell bit encryptions up, ell + 1 blinded values down.
Estimate svm_core(std::size_t ell);
Estimate svm_heuristic(std::size_t d);
/// Per layer of d units, both directions.
Estimate ffnn_generic_layer(std::size_t d);
/// Per unit.
Estimate sign_core_unit(std::size_t ell);
Estimate relu_core_unit(std::size_t ell);
Estimate sign_heuristic_unit();
Estimate relu_heuristic_unit();

double kilobytes(std::size_t bits);

/// Every row for the given parameters.
std::vector<Estimate> table(std::size_t d, std::size_t ell);

}  // namespace privml::bandwidth
