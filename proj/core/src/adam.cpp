#include "esseg/adam.hpp"

#include <cmath>

#include "esseg/errors.hpp"

namespace esseg {

void adam_step(AdamState& state, const std::vector<ParamRef>& params) {
    if (state.m.empty()) {
        state.m.reserve(params.size());
        state.v.reserve(params.size());
        for (const ParamRef& p : params) {
            state.m.emplace_back(p.value->channels, p.value->width, p.value->height);
            state.v.emplace_back(p.value->channels, p.value->width, p.value->height);
        }
    }
    if (state.m.size() != params.size())
        throw param_error("adam_step: parameter count changed mid-run");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i].value;
        const Tensor& g = *params[i].grad;
        if (!p.same_shape(g) || !p.same_shape(state.m[i]))
            throw shape_error("adam_step: shape mismatch for " + params[i].name);
        double* mp = state.m[i].data.data();
        double* vp = state.v[i].data.data();
        double* pp = p.data.data();
        const double* gp = g.data.data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!std::isfinite(gp[j]))
                throw numeric_error("adam_step: non-finite gradient in " + params[i].name);
            mp[j] = state.beta1 * mp[j] + (1.0 - state.beta1) * gp[j];
            vp[j] = state.beta2 * vp[j] + (1.0 - state.beta2) * gp[j] * gp[j];
            const double mhat = mp[j] / bc1;
            const double vhat = vp[j] / bc2;
            pp[j] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

} // namespace esseg
