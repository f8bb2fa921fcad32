#ifndef ESSEG_ADAM_HPP
#define ESSEG_ADAM_HPP

#include <string>
#include <vector>

#include "esseg/tensor.hpp"

namespace esseg {

// Adam with bias correction. Moment buffers are created on the first step
// and must keep matching the parameter list afterwards.
struct AdamState {
    long long step = 0;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

// One update slot: the parameter written in place, its gradient, and a name
// used in error messages.
struct ParamRef {
    Tensor* value;
    const Tensor* grad;
    std::string name;
};

// p -= lr * m_hat / (sqrt(v_hat) + epsilon). A non-finite gradient raises a
// numeric error naming the parameter. With fresh moments a zero gradient
// leaves the parameter bit-identical.
void adam_step(AdamState& state, const std::vector<ParamRef>& params);

} // namespace esseg

#endif
