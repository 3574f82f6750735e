#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <opencv2/core.hpp>

namespace painbench::nn {

// CHW tensor of doubles. Double precision keeps the finite-difference
// gradient checks meaningful.
struct Tensor {
    int c = 0, h = 0, w = 0;
    Eigen::VectorXd data;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), data(Eigen::VectorXd::Zero(c_ * h_ * w_)) {}

    double& at(int ci, int yi, int xi) { return data[(ci * h + yi) * w + xi]; }
    double at(int ci, int yi, int xi) const { return data[(ci * h + yi) * w + xi]; }
    int size() const { return c * h * w; }
};

// Deterministic RNG helpers; the raw bit mapping avoids any
// distribution implementation differences.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Box-Muller, deterministic.
    double normal();
    uint64_t integer(uint64_t n) { return engine_() % n; }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x) = 0;           // caches activations
    virtual Tensor backward(const Tensor& grad_out) = 0;   // accumulates param grads
    virtual std::span<double> params() { return {}; }
    virtual std::span<double> grads() { return {}; }
    virtual void init(Rng& rng) {}
    virtual std::string describe() const = 0;
};

class Conv2d : public Layer {
public:
    Conv2d(int in_c, int out_c, int kernel, int stride = 1, int pad = -1);  // pad -1 = same (stride 1)
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::span<double> params() override { return {params_.data(), static_cast<size_t>(params_.size())}; }
    std::span<double> grads() override { return {grads_.data(), static_cast<size_t>(grads_.size())}; }
    void init(Rng& rng) override;
    std::string describe() const override;

private:
    int in_c_, out_c_, k_, stride_, pad_;
    Eigen::VectorXd params_, grads_;  // weights, then biases
    Tensor input_;
    Eigen::MatrixXd cols_;
};

class ReLU : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string describe() const override { return "relu"; }

private:
    Tensor input_;
};

class MaxPool2d : public Layer {
public:
    explicit MaxPool2d(int size, int stride = -1);
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string describe() const override;

private:
    int size_, stride_;
    Tensor input_;
    std::vector<int> argmax_;
};

class GlobalAvgPool : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::string describe() const override { return "gap"; }

private:
    int h_ = 0, w_ = 0, c_ = 0;
};

class Dense : public Layer {
public:
    Dense(int in, int out);
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::span<double> params() override { return {params_.data(), static_cast<size_t>(params_.size())}; }
    std::span<double> grads() override { return {grads_.data(), static_cast<size_t>(grads_.size())}; }
    void init(Rng& rng) override;
    std::string describe() const override;

private:
    int in_, out_;
    Eigen::VectorXd params_, grads_;
    Tensor input_;
};

class Network {
public:
    std::string name;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
    void init(Rng& rng);

    Tensor forward(const Tensor& x);
    void backward(const Tensor& grad);
    void zero_grads();

    long long param_count() const;
    std::vector<std::span<double>> param_views();
    std::vector<std::span<double>> grad_views();
    std::vector<std::string> describe() const;

    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Softmax with cross-entropy; grad is probs - onehot(label).
struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd probs;
    Eigen::VectorXd grad;
};
LossResult softmax_cross_entropy(const Tensor& logits, int label);

class Adam {
public:
    Adam(std::vector<std::span<double>> params, double lr, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8);
    void step(const std::vector<std::span<double>>& grads);

private:
    std::vector<std::span<double>> params_;
    std::vector<Eigen::VectorXd> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

// 8-bit square image (OpenCV BGR) to CHW tensor in [0,1].
Tensor to_tensor(const cv::Mat& image);

struct Augmentation {
    double rotation_degrees = 15.0;
    bool mirror = true;
    double contrast_lo = 0.8;
    double contrast_hi = 1.2;
};

// Random rotation, horizontal mirror (p = 0.5) and multiplicative
// contrast; rotation resamples bilinearly with white fill.
Tensor augment(const Tensor& image, const Augmentation& aug, Rng& rng);

}  // namespace painbench::nn
