#include "jamdet/ad/ops.hpp"

#include "jamdet/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>

namespace jamdet::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
    if (a.dim() != rank)
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         to_string(a.shape()));
}

std::vector<double> copy_values(const Tensor& a) { return {a.values().begin(), a.values().end()}; }

template <class F>
std::vector<double> map_values(const Tensor& a, F f) {
    const auto v = a.values();
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
    return out;
}

template <class F>
std::vector<double> zip_values(const Tensor& a, const Tensor& b, F f) {
    const auto va = a.values();
    const auto vb = b.values();
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = f(va[i], vb[i]);
    return out;
}

Tensor constant_like(const Tensor& a, std::vector<double> values) { return Tensor::from(a.shape(), std::move(values)); }

struct ConvDims {
    std::size_t batch, in_ch, in_len, out_ch, kernel, out_len, stride, pad;
};

// cols(c*K + k, b*Lout + t) = x[b, c, t*s - p + k], zero outside [0, L).
Eigen::MatrixXd im2col(std::span<const double> x, const ConvDims& d) {
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.in_ch * d.kernel),
                                                 static_cast<Eigen::Index>(d.batch * d.out_len));
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t t = 0; t < d.out_len; ++t) {
            const auto col = static_cast<Eigen::Index>(b * d.out_len + t);
            for (std::size_t c = 0; c < d.in_ch; ++c) {
                const double* row = x.data() + (b * d.in_ch + c) * d.in_len;
                for (std::size_t k = 0; k < d.kernel; ++k) {
                    const auto pos = static_cast<std::ptrdiff_t>(t * d.stride + k) - static_cast<std::ptrdiff_t>(d.pad);
                    if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(d.in_len))
                        cols(static_cast<Eigen::Index>(c * d.kernel + k), col) = row[pos];
                }
            }
        }
    return cols;
}

std::vector<double> col2im(const Eigen::MatrixXd& cols, const ConvDims& d) {
    std::vector<double> x(d.batch * d.in_ch * d.in_len, 0.0);
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t t = 0; t < d.out_len; ++t) {
            const auto col = static_cast<Eigen::Index>(b * d.out_len + t);
            for (std::size_t c = 0; c < d.in_ch; ++c) {
                double* row = x.data() + (b * d.in_ch + c) * d.in_len;
                for (std::size_t k = 0; k < d.kernel; ++k) {
                    const auto pos = static_cast<std::ptrdiff_t>(t * d.stride + k) - static_cast<std::ptrdiff_t>(d.pad);
                    if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(d.in_len))
                        row[pos] += cols(static_cast<Eigen::Index>(c * d.kernel + k), col);
                }
            }
        }
    return x;
}

// [B, O, Lout] storage <-> (O x B*Lout) matrix.
Eigen::MatrixXd to_channel_matrix(std::span<const double> y, std::size_t batch, std::size_t ch, std::size_t len) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(batch * len));
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < ch; ++o)
            for (std::size_t t = 0; t < len; ++t)
                m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(b * len + t)) = y[(b * ch + o) * len + t];
    return m;
}

std::vector<double> from_channel_matrix(const Eigen::MatrixXd& m, std::size_t batch, std::size_t ch, std::size_t len) {
    std::vector<double> y(batch * ch * len);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < ch; ++o)
            for (std::size_t t = 0; t < len; ++t)
                y[(b * ch + o) * len + t] = m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(b * len + t));
    return y;
}

Eigen::Map<const RowMatrix> weight_matrix(const Tensor& w, std::size_t rows, std::size_t cols) {
    return {w.values().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

}  // namespace

// ---------------------------------------------------------------- element-wise

Tensor add(const Tensor& a, const Tensor& b) {
    require_same(a, b, "add");
    return Tensor::make_result(a.shape(), zip_values(a, b, [](double x, double y) { return x + y; }), "add", {a, b},
                               [](const std::vector<Tensor>&, const Tensor& g) { return std::vector<Tensor>{g, g}; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same(a, b, "sub");
    return Tensor::make_result(a.shape(), zip_values(a, b, [](double x, double y) { return x - y; }), "sub", {a, b},
                               [](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{g, neg(g)};
                               });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same(a, b, "mul");
    return Tensor::make_result(a.shape(), zip_values(a, b, [](double x, double y) { return x * y; }), "mul", {a, b},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{in[0].requires_grad() ? mul(g, in[1]) : Tensor(),
                                                              in[1].requires_grad() ? mul(g, in[0]) : Tensor()};
                               });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, double factor) {
    return Tensor::make_result(a.shape(), map_values(a, [factor](double x) { return x * factor; }), "scale", {a},
                               [factor](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{scale(g, factor)};
                               });
}

Tensor add_scalar(const Tensor& a, double offset) {
    return Tensor::make_result(a.shape(), map_values(a, [offset](double x) { return x + offset; }), "add_scalar", {a},
                               [](const std::vector<Tensor>&, const Tensor& g) { return std::vector<Tensor>{g}; });
}

Tensor square(const Tensor& a) {
    return Tensor::make_result(a.shape(), map_values(a, [](double x) { return x * x; }), "square", {a},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{mul(g, scale(in[0], 2.0))};
                               });
}

Tensor sqrt(const Tensor& a) {
    return Tensor::make_result(a.shape(), map_values(a, [](double x) { return std::sqrt(x); }), "sqrt", {a},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{mul(g, scale(reciprocal(sqrt(in[0])), 0.5))};
                               });
}

Tensor reciprocal(const Tensor& a) {
    return Tensor::make_result(a.shape(), map_values(a, [](double x) { return x == 0.0 ? 0.0 : 1.0 / x; }),
                               "reciprocal", {a}, [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{mul(g, neg(square(reciprocal(in[0]))))};
                               });
}

Tensor log(const Tensor& a) {
    return Tensor::make_result(a.shape(), map_values(a, [](double x) { return std::log(x); }), "log", {a},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{mul(g, reciprocal(in[0]))};
                               });
}

Tensor tanh(const Tensor& a) {
    return Tensor::make_result(a.shape(), map_values(a, [](double x) { return std::tanh(x); }), "tanh", {a},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{mul(g, add_scalar(neg(square(tanh(in[0]))), 1.0))};
                               });
}

Tensor sigmoid(const Tensor& a) {
    auto f = [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); };
    return Tensor::make_result(a.shape(), map_values(a, f), "sigmoid", {a},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   const Tensor s = sigmoid(in[0]);
                                   return std::vector<Tensor>{mul(g, mul(s, add_scalar(neg(s), 1.0)))};
                               });
}

Tensor mul_const(const Tensor& a, const Tensor& mask) {
    require_same(a, mask, "mul_const");
    const Tensor m = mask.requires_grad() ? mask.detach() : mask;
    return Tensor::make_result(a.shape(), zip_values(a, m, [](double x, double y) { return x * y; }), "mul_const",
                               {a}, [m](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{mul_const(g, m)};
                               });
}

Tensor relu(const Tensor& a) {
    return mul_const(a, constant_like(a, map_values(a, [](double x) { return x > 0.0 ? 1.0 : 0.0; })));
}

Tensor leaky_relu(const Tensor& a, double slope) {
    return mul_const(a, constant_like(a, map_values(a, [slope](double x) { return x > 0.0 ? 1.0 : slope; })));
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    const Tensor mask = constant_like(a, map_values(a, [lo, hi](double x) { return x >= lo && x <= hi ? 1.0 : 0.0; }));
    return Tensor::make_result(a.shape(), map_values(a, [lo, hi](double x) { return std::clamp(x, lo, hi); }), "clamp",
                               {a}, [mask](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{mul_const(g, mask)};
                               });
}

Tensor dropout(const Tensor& a, double p, std::uint64_t seed, bool train) {
    if (p < 0.0 || p >= 1.0) throw DomainError("dropout probability must be in [0, 1), got " + std::to_string(p));
    if (!train || p == 0.0) return a;
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(1.0 - p);
    std::vector<double> mask(a.numel());
    const double kept = 1.0 / (1.0 - p);
    for (auto& m : mask) m = keep(rng) ? kept : 0.0;
    return mul_const(a, constant_like(a, std::move(mask)));
}

// ---------------------------------------------------------------- reductions

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    return Tensor::make_result({1}, {s}, "sum", {a}, [](const std::vector<Tensor>& in, const Tensor& g) {
        return std::vector<Tensor>{expand(g, in[0].shape())};
    });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor expand(const Tensor& s, const Shape& shape) {
    if (s.numel() != 1) throw ShapeError("expand: expected a single-element tensor, got " + to_string(s.shape()));
    return Tensor::make_result(shape, std::vector<double>(numel(shape), s.values()[0]), "expand", {s},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{reshape(sum(g), in[0].shape())};
                               });
}

// ---------------------------------------------------------------- layout

Tensor reshape(const Tensor& a, Shape shape) {
    if (numel(shape) != a.numel())
        throw ShapeError("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
    if (shape == a.shape()) return a;
    return Tensor::make_result(std::move(shape), copy_values(a), "reshape", {a},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{reshape(g, in[0].shape())};
                               });
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose");
    const std::size_t r = a.size(0), c = a.size(1);
    const auto v = a.values();
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = v[i * c + j];
    return Tensor::make_result({c, r}, std::move(out), "transpose", {a},
                               [](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{transpose(g)};
                               });
}

Tensor channel_sum(const Tensor& a) {
    require_rank(a, 3, "channel_sum");
    const std::size_t B = a.size(0), C = a.size(1), L = a.size(2);
    const auto v = a.values();
    std::vector<double> out(C, 0.0);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) {
            const double* row = v.data() + (b * C + c) * L;
            double s = 0.0;
            for (std::size_t t = 0; t < L; ++t) s += row[t];
            out[c] += s;
        }
    return Tensor::make_result({C}, std::move(out), "channel_sum", {a},
                               [B, L](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{channel_broadcast(g, B, L)};
                               });
}

Tensor channel_broadcast(const Tensor& v, std::size_t batch, std::size_t length) {
    require_rank(v, 1, "channel_broadcast");
    const std::size_t C = v.size(0);
    const auto src = v.values();
    std::vector<double> out(batch * C * length);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < C; ++c) std::fill_n(out.begin() + (b * C + c) * length, length, src[c]);
    return Tensor::make_result({batch, C, length}, std::move(out), "channel_broadcast", {v},
                               [](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{channel_sum(g)};
                               });
}

Tensor row_sum(const Tensor& a) {
    const std::size_t B = a.size(0);
    return reshape(channel_sum(reshape(a, {1, B, a.numel() / B})), {B});
}

Tensor row_broadcast(const Tensor& v, const Shape& shape) {
    require_rank(v, 1, "row_broadcast");
    if (shape.empty() || shape[0] != v.size(0))
        throw ShapeError("row_broadcast: " + to_string(v.shape()) + " does not lead " + to_string(shape));
    return reshape(channel_broadcast(v, 1, numel(shape) / shape[0]), shape);
}

Tensor slice_channels(const Tensor& a, std::size_t start, std::size_t count) {
    require_rank(a, 3, "slice_channels");
    const std::size_t B = a.size(0), C = a.size(1), L = a.size(2);
    if (count == 0 || start + count > C)
        throw ShapeError("slice_channels: range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") outside " + to_string(a.shape()));
    const auto v = a.values();
    std::vector<double> out(B * count * L);
    for (std::size_t b = 0; b < B; ++b)
        std::copy_n(v.begin() + (b * C + start) * L, count * L, out.begin() + b * count * L);
    return Tensor::make_result({B, count, L}, std::move(out), "slice_channels", {a},
                               [start, C](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{pad_channels(g, start, C)};
                               });
}

Tensor pad_channels(const Tensor& a, std::size_t start, std::size_t total) {
    require_rank(a, 3, "pad_channels");
    const std::size_t B = a.size(0), C = a.size(1), L = a.size(2);
    if (start + C > total)
        throw ShapeError("pad_channels: " + to_string(a.shape()) + " does not fit in " + std::to_string(total) +
                         " channels at " + std::to_string(start));
    const auto v = a.values();
    std::vector<double> out(B * total * L, 0.0);
    for (std::size_t b = 0; b < B; ++b)
        std::copy_n(v.begin() + b * C * L, C * L, out.begin() + (b * total + start) * L);
    return Tensor::make_result({B, total, L}, std::move(out), "pad_channels", {a},
                               [start, C](const std::vector<Tensor>&, const Tensor& g) {
                                   return std::vector<Tensor>{slice_channels(g, start, C)};
                               });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_rank(a, 3, "concat_channels");
    require_rank(b, 3, "concat_channels");
    if (a.size(0) != b.size(0) || a.size(2) != b.size(2))
        throw ShapeError("concat_channels: shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    const std::size_t total = a.size(1) + b.size(1);
    return add(pad_channels(a, 0, total), pad_channels(b, a.size(1), total));
}

// ---------------------------------------------------------------- linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    if (a.size(1) != b.size(0))
        throw ShapeError("matmul: shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
    std::vector<double> out(m * n);
    Eigen::Map<RowMatrix> C(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    C.noalias() = weight_matrix(a, m, k) * weight_matrix(b, k, n);
    return Tensor::make_result({m, n}, std::move(out), "matmul", {a, b},
                               [](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{
                                       in[0].requires_grad() ? matmul(g, transpose(in[1])) : Tensor(),
                                       in[1].requires_grad() ? matmul(transpose(in[0]), g) : Tensor()};
                               });
}

Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    require_rank(x, 2, "dense");
    require_rank(weight, 2, "dense");
    require_rank(bias, 1, "dense");
    if (x.size(1) != weight.size(1) || bias.size(0) != weight.size(0))
        throw ShapeError("dense: input " + to_string(x.shape()) + " incompatible with weight " +
                         to_string(weight.shape()) + " and bias " + to_string(bias.shape()));
    const std::size_t B = x.size(0), M = weight.size(0);
    return add(matmul(x, transpose(weight)), reshape(channel_broadcast(bias, B, 1), {B, M}));
}

std::size_t conv1d_output_length(std::size_t in_length, std::size_t kernel, std::size_t stride, std::size_t padding) {
    if (stride == 0) throw DomainError("conv1d: stride must be positive");
    if (in_length + 2 * padding < kernel)
        throw ShapeError("conv1d: kernel " + std::to_string(kernel) + " longer than padded input " +
                         std::to_string(in_length + 2 * padding));
    return (in_length + 2 * padding - kernel) / stride + 1;
}

std::size_t conv1d_transpose_output_length(std::size_t in_length, std::size_t kernel, std::size_t stride,
                                           std::size_t padding, std::size_t output_padding) {
    const std::size_t full = (in_length - 1) * stride + kernel + output_padding;
    if (full <= 2 * padding) throw ShapeError("conv1d_transpose: padding removes the whole output");
    return full - 2 * padding;
}

Tensor conv1d(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t padding) {
    require_rank(x, 3, "conv1d");
    require_rank(weight, 3, "conv1d");
    if (x.size(1) != weight.size(1))
        throw ShapeError("conv1d: input " + to_string(x.shape()) + " incompatible with weight " +
                         to_string(weight.shape()));
    const ConvDims d{x.size(0), x.size(1), x.size(2), weight.size(0), weight.size(2),
                     conv1d_output_length(x.size(2), weight.size(2), stride, padding), stride, padding};
    const Eigen::MatrixXd cols = im2col(x.values(), d);
    const Eigen::MatrixXd y = weight_matrix(weight, d.out_ch, d.in_ch * d.kernel) * cols;
    return Tensor::make_result({d.batch, d.out_ch, d.out_len}, from_channel_matrix(y, d.batch, d.out_ch, d.out_len),
                               "conv1d", {x, weight}, [d](const std::vector<Tensor>& in, const Tensor& g) {
                                   return std::vector<Tensor>{
                                       in[0].requires_grad()
                                           ? conv1d_input_grad(g, in[1], d.stride, d.pad, d.in_len)
                                           : Tensor(),
                                       in[1].requires_grad()
                                           ? conv1d_weight_grad(in[0], g, d.stride, d.pad, d.kernel)
                                           : Tensor()};
                               });
}

Tensor conv1d_input_grad(const Tensor& y, const Tensor& weight, std::size_t stride, std::size_t padding,
                         std::size_t in_length) {
    require_rank(y, 3, "conv1d_input_grad");
    require_rank(weight, 3, "conv1d_input_grad");
    const ConvDims d{y.size(0), weight.size(1), in_length, weight.size(0), weight.size(2), y.size(2), stride, padding};
    if (y.size(1) != d.out_ch || conv1d_output_length(in_length, d.kernel, stride, padding) != d.out_len)
        throw ShapeError("conv1d_input_grad: " + to_string(y.shape()) + " incompatible with weight " +
                         to_string(weight.shape()) + " and input length " + std::to_string(in_length));
    const Eigen::MatrixXd g = to_channel_matrix(y.values(), d.batch, d.out_ch, d.out_len);
    const Eigen::MatrixXd cols = weight_matrix(weight, d.out_ch, d.in_ch * d.kernel).transpose() * g;
    return Tensor::make_result({d.batch, d.in_ch, d.in_len}, col2im(cols, d), "conv1d_input_grad", {y, weight},
                               [d](const std::vector<Tensor>& in, const Tensor& h) {
                                   return std::vector<Tensor>{
                                       in[0].requires_grad() ? conv1d(h, in[1], d.stride, d.pad) : Tensor(),
                                       in[1].requires_grad()
                                           ? conv1d_weight_grad(h, in[0], d.stride, d.pad, d.kernel)
                                           : Tensor()};
                               });
}

Tensor conv1d_weight_grad(const Tensor& x, const Tensor& y, std::size_t stride, std::size_t padding,
                          std::size_t kernel) {
    require_rank(x, 3, "conv1d_weight_grad");
    require_rank(y, 3, "conv1d_weight_grad");
    const ConvDims d{x.size(0), x.size(1), x.size(2), y.size(1), kernel, y.size(2), stride, padding};
    if (y.size(0) != d.batch || conv1d_output_length(d.in_len, kernel, stride, padding) != d.out_len)
        throw ShapeError("conv1d_weight_grad: input " + to_string(x.shape()) + " incompatible with output " +
                         to_string(y.shape()));
    const Eigen::MatrixXd cols = im2col(x.values(), d);
    const Eigen::MatrixXd g = to_channel_matrix(y.values(), d.batch, d.out_ch, d.out_len);
    std::vector<double> out(d.out_ch * d.in_ch * d.kernel);
    Eigen::Map<RowMatrix> W(out.data(), static_cast<Eigen::Index>(d.out_ch),
                            static_cast<Eigen::Index>(d.in_ch * d.kernel));
    W.noalias() = g * cols.transpose();
    return Tensor::make_result({d.out_ch, d.in_ch, d.kernel}, std::move(out), "conv1d_weight_grad", {x, y},
                               [d](const std::vector<Tensor>& in, const Tensor& h) {
                                   return std::vector<Tensor>{
                                       in[0].requires_grad() ? conv1d_input_grad(in[1], h, d.stride, d.pad, d.in_len)
                                                             : Tensor(),
                                       in[1].requires_grad() ? conv1d(in[0], h, d.stride, d.pad) : Tensor()};
                               });
}

Tensor conv1d_transpose(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t padding,
                        std::size_t output_padding) {
    require_rank(x, 3, "conv1d_transpose");
    require_rank(weight, 3, "conv1d_transpose");
    if (x.size(1) != weight.size(0))
        throw ShapeError("conv1d_transpose: input " + to_string(x.shape()) + " incompatible with weight " +
                         to_string(weight.shape()));
    if (output_padding >= stride && output_padding > 0)
        throw DomainError("conv1d_transpose: output_padding must be smaller than stride");
    const std::size_t out_len =
        conv1d_transpose_output_length(x.size(2), weight.size(2), stride, padding, output_padding);
    return conv1d_input_grad(x, weight, stride, padding, out_len);
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
    require_rank(x, 3, "add_channel_bias");
    return add(x, channel_broadcast(bias, x.size(0), x.size(2)));
}

// ---------------------------------------------------------------- losses

Tensor mse(const Tensor& prediction, const Tensor& target) {
    require_same(prediction, target, "mse");
    return mean(square(sub(prediction, target)));
}

Tensor bce(const Tensor& prediction, const Tensor& target) {
    require_same(prediction, target, "bce");
    const Tensor p = clamp(prediction, kBceClamp, 1.0 - kBceClamp);
    const Tensor t = target.detach();
    const Tensor not_t = constant_like(t, map_values(t, [](double v) { return 1.0 - v; }));
    const Tensor ll = add(mul_const(log(p), t), mul_const(log(add_scalar(neg(p), 1.0)), not_t));
    return neg(mean(ll));
}

}  // namespace jamdet::ad
