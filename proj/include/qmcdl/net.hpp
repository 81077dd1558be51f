#pragma once

// Fully connected feedforward networks
//     L(y) = C_K o sigma o C_{K-1} o ... o sigma o C_1 (y),  C_k z = W_k z + b_k,
// with optional batch normalization of every hidden pre-activation, exact
// forward and reverse-mode passes, and a flat binary model format.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "qmcdl/rng.hpp"

namespace qmcdl {

enum class Activation : std::uint8_t { sigmoid = 0, tanh = 1, relu = 2 };

[[nodiscard]] inline std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
    }
    return "unknown";
}

[[nodiscard]] inline Activation parse_activation(std::string_view name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

inline constexpr double kBatchNormEpsilon = 1e-5;

/// Architecture: `hidden_layers` hidden layers of uniform `width`, scalar
/// output.
struct NetworkConfig {
    std::size_t input_dim = 1;
    std::size_t hidden_layers = 1;
    std::size_t width = 6;
    Activation activation = Activation::sigmoid;
    bool batch_norm = false;

    void validate() const {
        if (input_dim == 0) throw std::invalid_argument("NetworkConfig: input_dim must be positive");
        if (hidden_layers == 0) throw std::invalid_argument("NetworkConfig: need at least one hidden layer");
        if (width == 0) throw std::invalid_argument("NetworkConfig: width must be positive");
    }

    [[nodiscard]] std::size_t layer_count() const noexcept { return hidden_layers + 1; }
    [[nodiscard]] std::size_t fan_in(std::size_t k) const noexcept { return k == 0 ? input_dim : width; }
    [[nodiscard]] std::size_t fan_out(std::size_t k) const noexcept { return k == hidden_layers ? 1 : width; }

    /// M = sum_k (d_k + 1) d_{k+1}, plus scale and shift per normalized layer.
    [[nodiscard]] std::size_t parameter_count() const noexcept {
        std::size_t m = 0;
        for (std::size_t k = 0; k < layer_count(); ++k) m += (fan_in(k) + 1) * fan_out(k);
        if (batch_norm) m += 2 * width * hidden_layers;
        return m;
    }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

[[nodiscard]] inline double activate(Activation a, double u) noexcept {
    switch (a) {
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-u));
        case Activation::tanh: return std::tanh(u);
        case Activation::relu: return u > 0.0 ? u : 0.0;
    }
    return u;
}

/// Derivative expressed through the input u and output s = sigma(u).
/// The ReLU subgradient at 0 is 0.
[[nodiscard]] inline double activate_derivative(Activation a, double u, double s) noexcept {
    switch (a) {
        case Activation::sigmoid: return s * (1.0 - s);
        case Activation::tanh: return 1.0 - s * s;
        case Activation::relu: return u > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

/// Mutable view of one affine layer inside the flat parameter vector.
struct AffineView {
    std::size_t in = 0;
    std::size_t out = 0;
    std::span<double> weights;  // out x in, row-major
    std::span<double> bias;     // out
};

struct ConstAffineView {
    std::size_t in = 0;
    std::size_t out = 0;
    std::span<const double> weights;
    std::span<const double> bias;
};

/// Per hidden layer batch statistics recorded by a training-mode forward
/// pass and used in inference mode.
struct BatchStatistics {
    std::vector<double> mean;
    std::vector<double> variance;

    friend bool operator==(const BatchStatistics&, const BatchStatistics&) = default;
};

/// Trainable parameters in one flat vector. Per layer k the layout is
/// W_k (row-major), b_k and, for normalized hidden layers, scale then shift.
class NetworkParams {
public:
    NetworkParams() = default;

    explicit NetworkParams(NetworkConfig config) : config_(config) {
        config_.validate();
        const std::size_t layers = config_.layer_count();
        weight_offset_.resize(layers);
        bias_offset_.resize(layers);
        norm_offset_.assign(layers, 0);
        std::size_t at = 0;
        for (std::size_t k = 0; k < layers; ++k) {
            weight_offset_[k] = at;
            at += config_.fan_in(k) * config_.fan_out(k);
            bias_offset_[k] = at;
            at += config_.fan_out(k);
            if (normalized(k)) {
                norm_offset_[k] = at;
                at += 2 * config_.width;
            }
        }
        values_.assign(at, 0.0);
        if (config_.batch_norm) {
            stats_.resize(config_.hidden_layers);
            for (std::size_t k = 0; k < config_.hidden_layers; ++k) {
                std::fill_n(values_.begin() + static_cast<std::ptrdiff_t>(norm_offset_[k]), config_.width, 1.0);
                stats_[k].mean.assign(config_.width, 0.0);
                stats_[k].variance.assign(config_.width, 1.0);
            }
        }
    }

    [[nodiscard]] const NetworkConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool normalized(std::size_t k) const noexcept {
        return config_.batch_norm && k < config_.hidden_layers;
    }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Mutable access invalidates forward tapes recorded against this object.
    [[nodiscard]] std::span<double> values() noexcept {
        ++revision_;
        return values_;
    }

    [[nodiscard]] ConstAffineView layer(std::size_t k) const {
        const std::size_t in = config_.fan_in(k), out = config_.fan_out(k);
        return {in, out, std::span<const double>(values_).subspan(weight_offset_[k], in * out),
                std::span<const double>(values_).subspan(bias_offset_[k], out)};
    }

    [[nodiscard]] AffineView layer(std::size_t k) {
        ++revision_;
        const std::size_t in = config_.fan_in(k), out = config_.fan_out(k);
        return {in, out, std::span<double>(values_).subspan(weight_offset_[k], in * out),
                std::span<double>(values_).subspan(bias_offset_[k], out)};
    }

    [[nodiscard]] std::span<const double> norm_scale(std::size_t k) const {
        return std::span<const double>(values_).subspan(norm_offset_.at(k), config_.width);
    }
    [[nodiscard]] std::span<const double> norm_shift(std::size_t k) const {
        return std::span<const double>(values_).subspan(norm_offset_.at(k) + config_.width, config_.width);
    }

    [[nodiscard]] const std::vector<BatchStatistics>& statistics() const noexcept { return stats_; }
    [[nodiscard]] std::vector<BatchStatistics>& statistics() noexcept { return stats_; }

    /// 1 for entries of some W_k, 0 for biases and normalization parameters.
    [[nodiscard]] std::vector<unsigned char> weight_mask() const {
        std::vector<unsigned char> mask(values_.size(), 0);
        for (std::size_t k = 0; k < config_.layer_count(); ++k) {
            std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(weight_offset_[k]),
                        config_.fan_in(k) * config_.fan_out(k), 1);
        }
        return mask;
    }

    [[nodiscard]] std::uint64_t revision() const noexcept { return revision_; }

    friend bool operator==(const NetworkParams& a, const NetworkParams& b) {
        return a.config_ == b.config_ && a.values_ == b.values_ && a.stats_ == b.stats_;
    }

private:
    NetworkConfig config_;
    std::vector<double> values_;
    std::vector<std::size_t> weight_offset_;
    std::vector<std::size_t> bias_offset_;
    std::vector<std::size_t> norm_offset_;
    std::vector<BatchStatistics> stats_;
    std::uint64_t revision_ = 0;
};

/// Xavier (Glorot) uniform initialization: W entries ~ U[-a, a] with
/// a = sqrt(6 / (fan_in + fan_out)); zero biases; unit scale, zero shift.
[[nodiscard]] inline NetworkParams init_xavier(const NetworkConfig& config, std::uint64_t seed) {
    NetworkParams params(config);
    SplitMix64 rng(seed);
    for (std::size_t k = 0; k < config.layer_count(); ++k) {
        auto layer = params.layer(k);
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        for (double& w : layer.weights) w = rng.uniform(-bound, bound);
    }
    return params;
}

enum class Mode { training, inference };

/// Intermediate values of one forward pass, consumed by backward().
struct ForwardTape {
    const NetworkParams* owner = nullptr;
    std::uint64_t revision = 0;
    std::size_t batch = 0;
    Mode mode = Mode::inference;
    std::vector<std::vector<double>> inputs;       // per layer: batch x fan_in
    std::vector<std::vector<double>> preact;       // per hidden layer: u fed to sigma
    std::vector<std::vector<double>> normalized;   // per hidden layer: x-hat (batch norm)
    std::vector<std::vector<double>> inv_std;      // per hidden layer
    std::vector<double> output;

    [[nodiscard]] bool valid_for(const NetworkParams& p) const noexcept {
        return owner == &p && revision == p.revision() && batch > 0;
    }
};

namespace detail {

inline void check_batch(const NetworkConfig& config, std::span<const double> batch) {
    if (batch.empty() || batch.size() % config.input_dim != 0) {
        throw std::invalid_argument("forward: batch size is not a multiple of the input dimension");
    }
}

/// Shared forward kernel. In training mode with batch norm, the statistics
/// of this batch are written to `stats_out`.
inline void forward_pass(const NetworkParams& params, std::span<const double> batch, Mode mode,
                         ForwardTape& tape, std::vector<BatchStatistics>* stats_out) {
    const NetworkConfig& cfg = params.config();
    check_batch(cfg, batch);
    const std::size_t n = batch.size() / cfg.input_dim;
    const bool bn = cfg.batch_norm;
    if (bn && mode == Mode::training && n < 2) {
        throw std::invalid_argument("forward: batch normalization in training mode needs batch size >= 2");
    }
    const std::size_t layers = cfg.layer_count();
    tape.batch = n;
    tape.mode = mode;
    tape.inputs.resize(layers);
    tape.preact.resize(cfg.hidden_layers);
    tape.normalized.resize(bn ? cfg.hidden_layers : 0);
    tape.inv_std.resize(bn ? cfg.hidden_layers : 0);
    tape.inputs[0].assign(batch.begin(), batch.end());

    std::vector<double> z;
    for (std::size_t k = 0; k < layers; ++k) {
        const auto layer = params.layer(k);
        const std::vector<double>& a = tape.inputs[k];
        z.assign(n * layer.out, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* ai = a.data() + i * layer.in;
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double* w = layer.weights.data() + o * layer.in;
                double acc = layer.bias[o];
                for (std::size_t j = 0; j < layer.in; ++j) acc += w[j] * ai[j];
                z[i * layer.out + o] = acc;
            }
        }
        if (k + 1 == layers) {
            tape.output = z;
            break;
        }

        std::vector<double>& u = tape.preact[k];
        if (bn) {
            const std::size_t w = layer.out;
            std::vector<double> mean(w, 0.0), var(w, 0.0);
            if (mode == Mode::training) {
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t o = 0; o < w; ++o) mean[o] += z[i * w + o];
                for (double& m : mean) m /= static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t o = 0; o < w; ++o) {
                        const double c = z[i * w + o] - mean[o];
                        var[o] += c * c;
                    }
                for (double& v : var) v /= static_cast<double>(n);
                if (stats_out) {
                    (*stats_out)[k].mean = mean;
                    (*stats_out)[k].variance = var;
                }
            } else {
                mean = params.statistics()[k].mean;
                var = params.statistics()[k].variance;
            }
            auto& xhat = tape.normalized[k];
            auto& inv = tape.inv_std[k];
            inv.resize(w);
            for (std::size_t o = 0; o < w; ++o) inv[o] = 1.0 / std::sqrt(var[o] + kBatchNormEpsilon);
            const auto scale = params.norm_scale(k);
            const auto shift = params.norm_shift(k);
            xhat.resize(n * w);
            u.resize(n * w);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t o = 0; o < w; ++o) {
                    const double x = (z[i * w + o] - mean[o]) * inv[o];
                    xhat[i * w + o] = x;
                    u[i * w + o] = scale[o] * x + shift[o];
                }
        } else {
            u = z;
        }
        auto& next = tape.inputs[k + 1];
        next.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) next[i] = activate(cfg.activation, u[i]);
    }
    tape.owner = &params;
    tape.revision = params.revision();
}

}  // namespace detail

/// Inference-mode evaluation of L_theta at each point of a row-major batch.
[[nodiscard]] inline std::vector<double> forward(const NetworkParams& params, std::span<const double> batch) {
    ForwardTape tape;
    detail::forward_pass(params, batch, Mode::inference, tape, nullptr);
    return std::move(tape.output);
}

/// Forward pass that keeps intermediates for backward(). In training mode
/// batch norm uses and records the statistics of this batch.
inline std::span<const double> forward(NetworkParams& params, std::span<const double> batch, Mode mode,
                                       ForwardTape& tape) {
    if (mode == Mode::training && params.config().batch_norm) {
        detail::forward_pass(params, batch, mode, tape, &params.statistics());
    } else {
        detail::forward_pass(params, batch, mode, tape, nullptr);
    }
    return tape.output;
}

/// Reverse-mode gradient of sum_i upstream[i] * L_theta(y_i) with respect
/// to every trainable parameter, in the flat layout of `params`. In training
/// mode the gradient flows through the batch statistics.
[[nodiscard]] inline std::vector<double> backward(const NetworkParams& params, const ForwardTape& tape,
                                                  std::span<const double> upstream) {
    if (!tape.valid_for(params)) throw std::logic_error("backward: forward state is missing or stale");
    const NetworkConfig& cfg = params.config();
    const std::size_t n = tape.batch;
    if (upstream.size() != n) throw std::invalid_argument("backward: upstream size differs from batch size");

    std::vector<double> grad(params.size(), 0.0);
    const auto base = params.values().data();
    auto grad_span = [&](std::span<const double> part) {
        return std::span<double>(grad.data() + (part.data() - base), part.size());
    };

    std::vector<double> delta(upstream.begin(), upstream.end());  // dLoss/dz for current layer
    std::vector<double> da;
    for (std::size_t k = cfg.layer_count(); k-- > 0;) {
        const auto layer = params.layer(k);
        const std::vector<double>& a = tape.inputs[k];
        auto gw = grad_span(layer.weights);
        auto gb = grad_span(layer.bias);
        for (std::size_t i = 0; i < n; ++i) {
            const double* ai = a.data() + i * layer.in;
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double g = delta[i * layer.out + o];
                if (g == 0.0) continue;
                gb[o] += g;
                double* row = gw.data() + o * layer.in;
                for (std::size_t j = 0; j < layer.in; ++j) row[j] += g * ai[j];
            }
        }
        if (k == 0) break;

        // Back through sigma and (optionally) batch norm of hidden layer k-1.
        const std::size_t w = layer.in;
        da.assign(n * w, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double g = delta[i * layer.out + o];
                if (g == 0.0) continue;
                const double* wrow = layer.weights.data() + o * layer.in;
                for (std::size_t j = 0; j < w; ++j) da[i * w + j] += g * wrow[j];
            }
        const std::size_t h = k - 1;
        const auto& u = tape.preact[h];
        const auto& s = tape.inputs[k];
        std::vector<double> du(n * w);
        for (std::size_t t = 0; t < du.size(); ++t) du[t] = da[t] * activate_derivative(cfg.activation, u[t], s[t]);

        if (!cfg.batch_norm) {
            delta = std::move(du);
            continue;
        }
        const auto scale = params.norm_scale(h);
        auto gscale = grad_span(scale);
        auto gshift = grad_span(params.norm_shift(h));
        const auto& xhat = tape.normalized[h];
        const auto& inv = tape.inv_std[h];
        std::vector<double> dx(n * w);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < w; ++o) {
                const std::size_t t = i * w + o;
                gscale[o] += du[t] * xhat[t];
                gshift[o] += du[t];
                dx[t] = du[t] * scale[o];
            }
        delta.assign(n * w, 0.0);
        if (tape.mode == Mode::inference) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t o = 0; o < w; ++o) delta[i * w + o] = dx[i * w + o] * inv[o];
            continue;
        }
        const double dn = static_cast<double>(n);
        for (std::size_t o = 0; o < w; ++o) {
            double sum_dx = 0.0, sum_dx_xhat = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum_dx += dx[i * w + o];
                sum_dx_xhat += dx[i * w + o] * xhat[i * w + o];
            }
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t t = i * w + o;
                delta[t] = inv[o] / dn * (dn * dx[t] - sum_dx - xhat[t] * sum_dx_xhat);
            }
        }
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline constexpr char kModelMagic[8] = {'Q', 'M', 'C', 'D', 'L', 'N', 'E', 'T'};
inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::uint64_t kMaxModelExtent = 1U << 16;

namespace detail {

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw std::runtime_error("model file truncated");
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace detail

/// Layout: magic "QMCDLNET", u32 format version, u64 input_dim,
/// u64 hidden_layers, u64 width, u8 activation, u8 batch_norm,
/// u64 parameter count, that many f64 parameters in layer order, then for
/// each normalized hidden layer width f64 means and width f64 variances.
/// All integers and floats little-endian.
inline void write_model(std::ostream& out, const NetworkParams& params) {
    out.write(kModelMagic, sizeof kModelMagic);
    const auto& cfg = params.config();
    detail::write_le<std::uint32_t>(out, kModelFormatVersion);
    detail::write_le<std::uint64_t>(out, cfg.input_dim);
    detail::write_le<std::uint64_t>(out, cfg.hidden_layers);
    detail::write_le<std::uint64_t>(out, cfg.width);
    detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.activation));
    detail::write_le<std::uint8_t>(out, cfg.batch_norm ? 1 : 0);
    detail::write_le<std::uint64_t>(out, params.size());
    for (double v : params.values()) detail::write_le<double>(out, v);
    for (const auto& s : params.statistics()) {
        for (double v : s.mean) detail::write_le<double>(out, v);
        for (double v : s.variance) detail::write_le<double>(out, v);
    }
    if (!out) throw std::runtime_error("write_model: stream error");
}

[[nodiscard]] inline NetworkParams read_model(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
        throw std::runtime_error("read_model: not a model file");
    }
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != kModelFormatVersion) {
        throw std::runtime_error("read_model: unsupported format version " + std::to_string(version));
    }
    NetworkConfig cfg;
    cfg.input_dim = detail::read_le<std::uint64_t>(in);
    cfg.hidden_layers = detail::read_le<std::uint64_t>(in);
    cfg.width = detail::read_le<std::uint64_t>(in);
    const auto act = detail::read_le<std::uint8_t>(in);
    if (act > 2) throw std::runtime_error("read_model: bad activation code");
    cfg.activation = static_cast<Activation>(act);
    cfg.batch_norm = detail::read_le<std::uint8_t>(in) != 0;
    if (cfg.input_dim == 0 || cfg.hidden_layers == 0 || cfg.width == 0 || cfg.input_dim > kMaxModelExtent ||
        cfg.hidden_layers > kMaxModelExtent || cfg.width > kMaxModelExtent) {
        throw std::runtime_error("read_model: implausible architecture in header");
    }
    NetworkParams params(cfg);
    const auto count = detail::read_le<std::uint64_t>(in);
    if (count != params.size()) throw std::runtime_error("read_model: parameter count does not match header");
    auto values = params.values();
    for (double& v : values) v = detail::read_le<double>(in);
    for (auto& s : params.statistics()) {
        for (double& v : s.mean) v = detail::read_le<double>(in);
        for (double& v : s.variance) v = detail::read_le<double>(in);
    }
    return params;
}

inline void save_model(const std::string& path, const NetworkParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_model(out, params);
}

[[nodiscard]] inline NetworkParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_model(in);
}

}  // namespace qmcdl
