#include "jamdet/ad/penalty.hpp"

#include "jamdet/ad/ops.hpp"
#include "jamdet/error.hpp"

namespace jamdet::ad {

InputGradientPenalty input_gradient_penalty(const std::function<Tensor(const Tensor&)>& net, const Tensor& x) {
    EnableGradGuard recording;
    const Tensor input = Tensor::from(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), true);
    const Tensor out = net(input);
    const std::size_t batch = input.size(0);
    if (out.numel() != batch)
        throw ShapeError("gradient penalty: network output " + to_string(out.shape()) + " is not one scalar per row of " +
                         to_string(input.shape()));

    const Tensor grad = gradients(sum(out), {input}, /*create_graph=*/true)[0];
    const Tensor norms = sqrt(row_sum(square(grad)));

    InputGradientPenalty result;
    result.norms.assign(norms.values().begin(), norms.values().end());
    for (double n : result.norms)
        if (n == 0.0) ++result.zero_norm_rows;
    result.penalty = mean(square(add_scalar(norms, -1.0)));
    return result;
}

}  // namespace jamdet::ad
