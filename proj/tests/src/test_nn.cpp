#include <doctest.h>

#include <cmath>
#include <memory>

#include "helpers.hpp"
#include "painbench/nn.hpp"

using namespace painbench;

namespace {

std::unique_ptr<nn::Network> small_net() {
    auto net = std::make_unique<nn::Network>();
    net->name = "small";
    net->add(std::make_unique<nn::Conv2d>(3, 4, 3));
    net->add(std::make_unique<nn::ReLU>());
    net->add(std::make_unique<nn::MaxPool2d>(2));
    net->add(std::make_unique<nn::Conv2d>(4, 6, 3));
    net->add(std::make_unique<nn::ReLU>());
    net->add(std::make_unique<nn::GlobalAvgPool>());
    net->add(std::make_unique<nn::Dense>(6, 2));
    return net;
}

nn::Tensor random_input(int c, int h, int w, uint64_t seed) {
    nn::Rng rng(seed);
    nn::Tensor x(c, h, w);
    for (int i = 0; i < x.size(); ++i) x.data[i] = rng.uniform();
    return x;
}

double loss_of(nn::Network& net, const nn::Tensor& x, int label) {
    return nn::softmax_cross_entropy(net.forward(x), label).loss;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    auto net = small_net();
    nn::Rng rng(7);
    net->init(rng);
    nn::Tensor x = random_input(3, 10, 10, 8);
    const int label = 1;

    net->zero_grads();
    auto loss = nn::softmax_cross_entropy(net->forward(x), label);
    nn::Tensor g(2, 1, 1);
    g.data = loss.grad;
    net->backward(g);

    auto params = net->param_views();
    auto grads = net->grad_views();
    const double h = 1e-6;
    nn::Rng pick(99);
    int checked = 0;
    while (checked < 20) {
        size_t view = pick.integer(params.size());
        size_t idx = pick.integer(params[view].size());
        double saved = params[view][idx];

        params[view][idx] = saved + h;
        double up = loss_of(*net, x, label);
        params[view][idx] = saved - h;
        double down = loss_of(*net, x, label);
        params[view][idx] = saved;

        double fd = (up - down) / (2 * h);
        double an = grads[view][idx];
        double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
        CHECK(rel < 1e-3);
        ++checked;
    }
}

TEST_CASE("softmax cross entropy") {
    nn::Tensor logits(2, 1, 1);
    logits.data << 1.0, 1.0;
    auto r = nn::softmax_cross_entropy(logits, 0);
    CHECK(r.probs.sum() == doctest::Approx(1.0));
    CHECK(r.probs[0] == doctest::Approx(0.5));
    CHECK(r.loss == doctest::Approx(std::log(2.0)));
    CHECK(r.grad[0] == doctest::Approx(-0.5));
    CHECK(r.grad[1] == doctest::Approx(0.5));
}

TEST_CASE("network save/load round trip") {
    auto dir = test_dir("nn_saveload");
    auto net = small_net();
    nn::Rng rng(4);
    net->init(rng);
    net->save(dir / "net.pbnet");

    auto other = small_net();
    nn::Rng rng2(123);
    other->init(rng2);
    other->load(dir / "net.pbnet");

    nn::Tensor x = random_input(3, 10, 10, 5);
    nn::Tensor a = net->forward(x);
    nn::Tensor b = other->forward(x);
    for (int i = 0; i < a.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("rng and adam are deterministic") {
    nn::Rng a(10), b(10);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }

    auto run = [] {
        auto net = small_net();
        nn::Rng rng(3);
        net->init(rng);
        nn::Adam adam(net->param_views(), 0.01);
        nn::Tensor x = random_input(3, 10, 10, 6);
        for (int step = 0; step < 5; ++step) {
            net->zero_grads();
            auto loss = nn::softmax_cross_entropy(net->forward(x), 1);
            nn::Tensor g(2, 1, 1);
        g.data = loss.grad;
        net->backward(g);
            adam.step(net->grad_views());
        }
        return nn::softmax_cross_entropy(net->forward(x), 1).loss;
    };
    double first = run();
    CHECK(run() == first);
    CHECK(std::isfinite(first));
}

TEST_CASE("to_tensor maps 8-bit BGR into [0,1] CHW") {
    cv::Mat img(2, 2, CV_8UC3, cv::Scalar(0, 0, 0));
    img.at<cv::Vec3b>(0, 1) = cv::Vec3b(255, 128, 64);
    nn::Tensor t = nn::to_tensor(img);
    REQUIRE(t.c == 3);
    CHECK(t.at(0, 0, 1) == doctest::Approx(1.0));          // blue channel
    CHECK(t.at(1, 0, 1) == doctest::Approx(128.0 / 255));  // green
    CHECK(t.at(2, 0, 1) == doctest::Approx(64.0 / 255));   // red
    for (int i = 0; i < t.size(); ++i) {
        CHECK(t.data[i] >= 0.0);
        CHECK(t.data[i] <= 1.0);
    }
}

TEST_CASE("augmentation") {
    nn::Tensor x = random_input(3, 12, 12, 77);

    SUBCASE("identity settings reproduce the input") {
        nn::Augmentation id{0.0, false, 1.0, 1.0};
        nn::Rng rng(1);
        nn::Tensor y = nn::augment(x, id, rng);
        for (int i = 0; i < x.size(); ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]));
    }
    SUBCASE("same seed, same augmentation") {
        nn::Augmentation aug;
        nn::Rng r1(5), r2(5);
        nn::Tensor a = nn::augment(x, aug, r1);
        nn::Tensor b = nn::augment(x, aug, r2);
        for (int i = 0; i < a.size(); ++i) CHECK(a.data[i] == b.data[i]);
    }
    SUBCASE("output stays in [0,1]") {
        nn::Augmentation aug{30.0, true, 0.5, 1.5};
        nn::Rng rng(9);
        for (int trial = 0; trial < 5; ++trial) {
            nn::Tensor y = nn::augment(x, aug, rng);
            for (int i = 0; i < y.size(); ++i) {
                CHECK(y.data[i] >= 0.0);
                CHECK(y.data[i] <= 1.0);
            }
        }
    }
}
