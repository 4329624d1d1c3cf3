#include "privml/bandwidth.hpp"

namespace privml::bandwidth {

Estimate regr_core(std::size_t d) { return {"regr-core", {d, 1, 0}, {1, 0, 0}, "per query"}; }

Estimate publish(std::size_t d) { return {"publish", {0, 0, 0}, {d + 1, 1, 0}, "once"}; }

Estimate regr_dual() { return {"regr-dual", {1, 0, 0}, {0, 0, 1}, "per query"}; }

Estimate svm_core(std::size_t ell) {
  return {"svm-core", {ell + 1, 0, 0}, {ell + 1, 0, 0}, "per query"};
}

Estimate svm_heuristic(std::size_t d) {
  return {"svm-heuristic", {d, 1, 0}, {1, 0, 0}, "per query"};
}

Estimate ffnn_generic_layer(std::size_t d) {
  return {"ffnn-generic", {d, 0, 0}, {d, 0, 0}, "per layer"};
}

Estimate sign_core_unit(std::size_t ell) {
  return {"ffnn-sign-core", {ell + 2, 0, 0}, {ell + 1, 0, 0}, "per unit"};
}

Estimate relu_core_unit(std::size_t ell) {
  return {"ffnn-relu-core", {ell + 4, 0, 0}, {ell + 1, 0, 0}, "per unit"};
}

Estimate sign_heuristic_unit() { return {"ffnn-sign-heuristic", {1, 0, 0}, {1, 0, 0}, "per unit"}; }

Estimate relu_heuristic_unit() { return {"ffnn-relu-heuristic", {3, 0, 0}, {1, 0, 0}, "per unit"}; }

double kilobytes(std::size_t bits) { return static_cast<double>(bits) / 8.0 / 1024.0; }

std::vector<Estimate> table(std::size_t d, std::size_t ell) {
  return {regr_core(d),        publish(d),          regr_dual(),
          svm_core(ell),       svm_heuristic(d),    ffnn_generic_layer(d),
          sign_core_unit(ell), relu_core_unit(ell), sign_heuristic_unit(),
          relu_heuristic_unit()};
}

}  // namespace privml::bandwidth
