#include "qhist/types.hpp"

#include <cstdlib>

namespace qhist {

std::string label_name(Label label) {
  if (label == kComplement) return "complement";
  return std::to_string(label);
}

long dense_dimension_limit() {
  if (const char* env = std::getenv("QHIST_DENSE_MAX_DIM")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && value > 0) return value;
  }
  return 6000;
}

}  // namespace qhist
