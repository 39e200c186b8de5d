#pragma once

#include <cmath>

#include "lungct/errors.hpp"
#include "lungct/volume_io.hpp"

namespace lungct {

// Softmax output of the 3-class classifier, class order Control < CAP < Covid.
struct ClassProbs {
  double p_control = 0.0;
  double p_cap = 0.0;
  double p_covid = 0.0;

  double operator[](int i) const { return i == 0 ? p_control : i == 1 ? p_cap : p_covid; }

  // Ties break toward the lowest class index.
  Label argmax() const {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if ((*this)[i] > (*this)[best]) best = i;
    return static_cast<Label>(best);
  }

  void validate() const {
    const double s = p_control + p_cap + p_covid;
    if (!(p_control >= 0 && p_cap >= 0 && p_covid >= 0))
      throw validation_error("ClassProbs: negative probability");
    if (std::abs(s - 1.0) > 1e-6) throw validation_error("ClassProbs: probabilities must sum to 1");
  }
};

struct BinaryPrediction {
  double score = 0.0;        // p_covid, used for the ROC sweep
  bool predicted_positive = false;
};

// Covid-vs-rest collapse: the continuous score is p_covid, the hard call is
// whether the 3-class argmax lands on Covid.
inline BinaryPrediction collapse_binary(const ClassProbs& p) {
  p.validate();
  return {p.p_covid, p.argmax() == Label::Covid};
}

}  // namespace lungct
