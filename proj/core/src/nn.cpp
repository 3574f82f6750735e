#include "painbench/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "painbench/error.hpp"

namespace painbench::nn {

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_c, int out_c, int kernel, int stride, int pad)
    : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride),
      pad_(pad >= 0 ? pad : kernel / 2) {
    int n_weights = out_c_ * in_c_ * k_ * k_;
    params_ = Eigen::VectorXd::Zero(n_weights + out_c_);
    grads_ = Eigen::VectorXd::Zero(params_.size());
}

void Conv2d::init(Rng& rng) {
    // He initialization for the ReLU nets used here.
    double stddev = std::sqrt(2.0 / (in_c_ * k_ * k_));
    int n_weights = out_c_ * in_c_ * k_ * k_;
    for (int i = 0; i < n_weights; ++i) params_[i] = stddev * rng.normal();
    for (int i = 0; i < out_c_; ++i) params_[n_weights + i] = 0.0;
}

std::string Conv2d::describe() const {
    return "conv" + std::to_string(k_) + "x" + std::to_string(k_) + "(" +
           std::to_string(in_c_) + "->" + std::to_string(out_c_) + ",s" +
           std::to_string(stride_) + ",p" + std::to_string(pad_) + ")";
}

Tensor Conv2d::forward(const Tensor& x) {
    if (x.c != in_c_)
        fail("ShapeMismatch", "conv expected " + std::to_string(in_c_) + " channels, got " +
                                  std::to_string(x.c));
    input_ = x;
    int oh = (x.h + 2 * pad_ - k_) / stride_ + 1;
    int ow = (x.w + 2 * pad_ - k_) / stride_ + 1;
    int patch = in_c_ * k_ * k_;

    cols_.resize(patch, oh * ow);
    cols_.setZero();
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            int col = oy * ow + ox;
            int base_y = oy * stride_ - pad_;
            int base_x = ox * stride_ - pad_;
            int p = 0;
            for (int ci = 0; ci < in_c_; ++ci) {
                for (int ky = 0; ky < k_; ++ky) {
                    int yy = base_y + ky;
                    if (yy < 0 || yy >= x.h) {
                        p += k_;
                        continue;
                    }
                    for (int kx = 0; kx < k_; ++kx, ++p) {
                        int xx = base_x + kx;
                        if (xx >= 0 && xx < x.w) cols_(p, col) = x.at(ci, yy, xx);
                    }
                }
            }
        }
    }

    Eigen::Map<const Eigen::MatrixXd> weights(params_.data(), patch, out_c_);
    Eigen::Map<const Eigen::VectorXd> bias(params_.data() + out_c_ * patch, out_c_);

    Tensor out(out_c_, oh, ow);
    Eigen::Map<Eigen::MatrixXd> out_mat(out.data.data(), oh * ow, out_c_);
    out_mat.noalias() = cols_.transpose() * weights;
    out_mat.rowwise() += bias.transpose();
    // out_mat is (pixels x channels) column-major == CHW flat layout.
    return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
    int oh = grad_out.h, ow = grad_out.w;
    int patch = in_c_ * k_ * k_;
    Eigen::Map<const Eigen::MatrixXd> g(grad_out.data.data(), oh * ow, out_c_);
    Eigen::Map<Eigen::MatrixXd> dW(grads_.data(), patch, out_c_);
    Eigen::Map<Eigen::VectorXd> db(grads_.data() + out_c_ * patch, out_c_);
    dW.noalias() += cols_ * g;
    db.noalias() += g.colwise().sum().transpose();

    Eigen::Map<const Eigen::MatrixXd> weights(params_.data(), patch, out_c_);
    Eigen::MatrixXd dcols = weights * g.transpose();  // patch x pixels

    Tensor dx(input_.c, input_.h, input_.w);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            int col = oy * ow + ox;
            int base_y = oy * stride_ - pad_;
            int base_x = ox * stride_ - pad_;
            int p = 0;
            for (int ci = 0; ci < in_c_; ++ci) {
                for (int ky = 0; ky < k_; ++ky) {
                    int yy = base_y + ky;
                    for (int kx = 0; kx < k_; ++kx, ++p) {
                        int xx = base_x + kx;
                        if (yy >= 0 && yy < input_.h && xx >= 0 && xx < input_.w)
                            dx.at(ci, yy, xx) += dcols(p, col);
                    }
                }
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------- ReLU

Tensor ReLU::forward(const Tensor& x) {
    input_ = x;
    Tensor out = x;
    out.data = out.data.cwiseMax(0.0);
    return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    Tensor dx = grad_out;
    for (int i = 0; i < dx.data.size(); ++i)
        if (input_.data[i] <= 0.0) dx.data[i] = 0.0;
    return dx;
}

// ---------------------------------------------------------------- MaxPool2d

MaxPool2d::MaxPool2d(int size, int stride) : size_(size), stride_(stride > 0 ? stride : size) {}

std::string MaxPool2d::describe() const {
    return "maxpool" + std::to_string(size_) + "(s" + std::to_string(stride_) + ")";
}

Tensor MaxPool2d::forward(const Tensor& x) {
    input_ = x;
    int oh = (x.h - size_) / stride_ + 1;
    int ow = (x.w - size_) / stride_ + 1;
    Tensor out(x.c, oh, ow);
    argmax_.assign(static_cast<size_t>(x.c) * oh * ow, 0);
    for (int ci = 0; ci < x.c; ++ci) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double best = -1e300;
                int best_idx = 0;
                for (int ky = 0; ky < size_; ++ky) {
                    for (int kx = 0; kx < size_; ++kx) {
                        int yy = oy * stride_ + ky;
                        int xx = ox * stride_ + kx;
                        double v = x.at(ci, yy, xx);
                        if (v > best) {
                            best = v;
                            best_idx = (ci * x.h + yy) * x.w + xx;
                        }
                    }
                }
                out.at(ci, oy, ox) = best;
                argmax_[(static_cast<size_t>(ci) * oh + oy) * ow + ox] = best_idx;
            }
        }
    }
    return out;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
    Tensor dx(input_.c, input_.h, input_.w);
    for (size_t i = 0; i < argmax_.size(); ++i)
        dx.data[argmax_[i]] += grad_out.data[static_cast<int>(i)];
    return dx;
}

// ---------------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x) {
    c_ = x.c;
    h_ = x.h;
    w_ = x.w;
    Tensor out(x.c, 1, 1);
    for (int ci = 0; ci < x.c; ++ci) {
        double sum = 0;
        for (int y = 0; y < x.h; ++y)
            for (int xx = 0; xx < x.w; ++xx) sum += x.at(ci, y, xx);
        out.data[ci] = sum / (x.h * x.w);
    }
    return out;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
    Tensor dx(c_, h_, w_);
    double scale = 1.0 / (h_ * w_);
    for (int ci = 0; ci < c_; ++ci) {
        double g = grad_out.data[ci] * scale;
        for (int y = 0; y < h_; ++y)
            for (int xx = 0; xx < w_; ++xx) dx.at(ci, y, xx) = g;
    }
    return dx;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(int in, int out) : in_(in), out_(out) {
    params_ = Eigen::VectorXd::Zero(static_cast<long>(in) * out + out);
    grads_ = Eigen::VectorXd::Zero(params_.size());
}

void Dense::init(Rng& rng) {
    double stddev = std::sqrt(2.0 / in_);
    for (long i = 0; i < static_cast<long>(in_) * out_; ++i) params_[i] = stddev * rng.normal();
}

std::string Dense::describe() const {
    return "dense(" + std::to_string(in_) + "->" + std::to_string(out_) + ")";
}

Tensor Dense::forward(const Tensor& x) {
    if (x.size() != in_)
        fail("ShapeMismatch", "dense expected " + std::to_string(in_) + " inputs, got " +
                                  std::to_string(x.size()));
    input_ = x;
    Eigen::Map<const Eigen::MatrixXd> weights(params_.data(), in_, out_);
    Eigen::Map<const Eigen::VectorXd> bias(params_.data() + static_cast<long>(in_) * out_, out_);
    Tensor out(out_, 1, 1);
    out.data.noalias() = weights.transpose() * x.data;
    out.data += bias;
    return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
    Eigen::Map<Eigen::MatrixXd> dW(grads_.data(), in_, out_);
    Eigen::Map<Eigen::VectorXd> db(grads_.data() + static_cast<long>(in_) * out_, out_);
    dW.noalias() += input_.data * grad_out.data.transpose();
    db += grad_out.data;
    Eigen::Map<const Eigen::MatrixXd> weights(params_.data(), in_, out_);
    Tensor dx(input_.c, input_.h, input_.w);
    dx.data.noalias() = weights * grad_out.data;
    return dx;
}

// ---------------------------------------------------------------- Network

void Network::init(Rng& rng) {
    for (auto& layer : layers_) layer->init(rng);
}

Tensor Network::forward(const Tensor& x) {
    Tensor cur = x;
    for (auto& layer : layers_) cur = layer->forward(cur);
    return cur;
}

void Network::backward(const Tensor& grad) {
    Tensor cur = grad;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
}

void Network::zero_grads() {
    for (auto& layer : layers_) {
        auto g = layer->grads();
        std::fill(g.begin(), g.end(), 0.0);
    }
}

long long Network::param_count() const {
    long long n = 0;
    for (const auto& layer : layers_)
        n += static_cast<long long>(const_cast<Layer&>(*layer).params().size());
    return n;
}

std::vector<std::span<double>> Network::param_views() {
    std::vector<std::span<double>> views;
    for (auto& layer : layers_) {
        auto p = layer->params();
        if (!p.empty()) views.push_back(p);
    }
    return views;
}

std::vector<std::span<double>> Network::grad_views() {
    std::vector<std::span<double>> views;
    for (auto& layer : layers_) {
        auto g = layer->grads();
        if (!g.empty()) views.push_back(g);
    }
    return views;
}

std::vector<std::string> Network::describe() const {
    std::vector<std::string> out;
    for (const auto& layer : layers_) out.push_back(layer->describe());
    return out;
}

static constexpr char kMagic[8] = {'P', 'B', 'N', 'E', 'T', '1', 0, 0};

void Network::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot write weights file " + path.string());
    out.write(kMagic, sizeof(kMagic));
    uint32_t name_len = static_cast<uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(name.data(), name_len);
    uint64_t total = static_cast<uint64_t>(param_count());
    out.write(reinterpret_cast<const char*>(&total), sizeof(total));
    for (const auto& layer : layers_) {
        auto p = const_cast<Layer&>(*layer).params();
        out.write(reinterpret_cast<const char*>(p.data()),
                  static_cast<std::streamsize>(p.size() * sizeof(double)));
    }
}

void Network::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("IoError", "cannot read weights file " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        fail("IoError", "bad weights file magic in " + path.string());
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string stored(name_len, ' ');
    in.read(stored.data(), name_len);
    if (!name.empty() && stored != name)
        fail("ShapeMismatch", "weights file is for '" + stored + "', expected '" + name + "'");
    uint64_t total = 0;
    in.read(reinterpret_cast<char*>(&total), sizeof(total));
    if (total != static_cast<uint64_t>(param_count()))
        fail("ShapeMismatch", "weights file has " + std::to_string(total) + " parameters, net has " +
                                  std::to_string(param_count()));
    for (auto& layer : layers_) {
        auto p = layer->params();
        in.read(reinterpret_cast<char*>(p.data()),
                static_cast<std::streamsize>(p.size() * sizeof(double)));
    }
    if (!in) fail("IoError", "truncated weights file " + path.string());
}

// ---------------------------------------------------------------- loss

LossResult softmax_cross_entropy(const Tensor& logits, int label) {
    LossResult r;
    double mx = logits.data.maxCoeff();
    Eigen::VectorXd e = (logits.data.array() - mx).exp();
    r.probs = e / e.sum();
    r.loss = -std::log(std::max(r.probs[label], 1e-300));
    r.grad = r.probs;
    r.grad[label] -= 1.0;
    return r;
}

// ---------------------------------------------------------------- Adam

Adam::Adam(std::vector<std::span<double>> params, double lr, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
        m_.push_back(Eigen::VectorXd::Zero(static_cast<long>(p.size())));
        v_.push_back(Eigen::VectorXd::Zero(static_cast<long>(p.size())));
    }
}

void Adam::step(const std::vector<std::span<double>>& grads) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        const auto& g = grads[i];
        auto& m = m_[i];
        auto& v = v_[i];
        for (size_t j = 0; j < p.size(); ++j) {
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
            double mhat = m[j] / bc1;
            double vhat = v[j] / bc2;
            p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

// ---------------------------------------------------------------- images

Tensor to_tensor(const cv::Mat& image) {
    if (image.empty() || image.type() != CV_8UC3)
        fail("ShapeMismatch", "to_tensor needs an 8-bit color image");
    Tensor t(3, image.rows, image.cols);
    for (int y = 0; y < image.rows; ++y) {
        const auto* row = image.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.cols; ++x)
            for (int ci = 0; ci < 3; ++ci) t.at(ci, y, x) = row[x][ci] / 255.0;
    }
    return t;
}

Tensor augment(const Tensor& image, const Augmentation& aug, Rng& rng) {
    double angle = rng.uniform(-aug.rotation_degrees, aug.rotation_degrees) * M_PI / 180.0;
    bool mirror = aug.mirror && rng.uniform() < 0.5;
    double contrast = rng.uniform(aug.contrast_lo, aug.contrast_hi);

    Tensor out(image.c, image.h, image.w);
    double cy = (image.h - 1) / 2.0, cx = (image.w - 1) / 2.0;
    double ca = std::cos(angle), sa = std::sin(angle);
    for (int y = 0; y < image.h; ++y) {
        for (int x = 0; x < image.w; ++x) {
            double xs = mirror ? (image.w - 1 - x) : x;
            // inverse rotation about the center
            double dx = xs - cx, dy = y - cy;
            double sx = cx + ca * dx + sa * dy;
            double sy = cy - sa * dx + ca * dy;
            int x0 = static_cast<int>(std::floor(sx));
            int y0 = static_cast<int>(std::floor(sy));
            double fx = sx - x0, fy = sy - y0;
            for (int ci = 0; ci < image.c; ++ci) {
                auto sample = [&](int yy, int xx) {
                    if (yy < 0 || yy >= image.h || xx < 0 || xx >= image.w) return 1.0;  // white
                    return image.at(ci, yy, xx);
                };
                double v = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                           fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
                out.at(ci, y, x) = std::clamp(v * contrast, 0.0, 1.0);
            }
        }
    }
    return out;
}

}  // namespace painbench::nn
