#include "painbench/model_zoo.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"
#include "painbench/hash.hpp"

namespace fs = std::filesystem;

namespace painbench::zoo {

void TrainConfig::validate() const {
    if (epochs < 1) fail("MissingField", "epochs must be >= 1");
    if (learning_rate <= 0) fail("MissingField", "learning_rate must be > 0");
    if (batch_size < 1) fail("MissingField", "batch_size must be >= 1");
    if (!(augmentation.contrast_lo > 0 && augmentation.contrast_lo <= 1.0 &&
          augmentation.contrast_hi >= 1.0))
        fail("MissingField", "contrast range must satisfy 0 < lo <= 1 <= hi");
}

namespace {

std::unique_ptr<nn::Network> make_net(const std::string& name) {
    auto net = std::make_unique<nn::Network>();
    net->name = name;
    using namespace nn;
    if (name == "tiny_cnn") {
        // 3 conv blocks + GAP head; input 64.
        net->add(std::make_unique<Conv2d>(3, 8, 3));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(8, 16, 3));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(16, 32, 3));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<GlobalAvgPool>());
        net->add(std::make_unique<Dense>(32, 2));
    } else if (name == "songnet") {
        net->add(std::make_unique<Conv2d>(3, 32, 5));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(32, 32, 4));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(32, 64, 5));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<GlobalAvgPool>());
        net->add(std::make_unique<Dense>(64, 2));
    } else if (name == "weinet") {
        net->add(std::make_unique<Conv2d>(3, 20, 5));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(20, 40, 5));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(40, 80, 5));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<GlobalAvgPool>());
        net->add(std::make_unique<Dense>(80, 2));
    } else if (name == "silnet") {
        net->add(std::make_unique<Conv2d>(3, 32, 5));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(32, 64, 5));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<Conv2d>(64, 128, 3));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(2));
        net->add(std::make_unique<GlobalAvgPool>());
        net->add(std::make_unique<Dense>(128, 2));
    } else if (name == "alexnet") {
        net->add(std::make_unique<Conv2d>(3, 96, 11, 4, 0));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(3, 2));
        net->add(std::make_unique<Conv2d>(96, 256, 5, 1, 2));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(3, 2));
        net->add(std::make_unique<Conv2d>(256, 384, 3));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<Conv2d>(384, 384, 3));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<Conv2d>(384, 256, 3));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<MaxPool2d>(3, 2));
        net->add(std::make_unique<Dense>(256 * 6 * 6, 4096));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<Dense>(4096, 4096));
        net->add(std::make_unique<ReLU>());
        net->add(std::make_unique<Dense>(4096, 2));
    } else {
        return nullptr;  // pretrained backbone, not a sequential graph
    }
    return net;
}

std::optional<fs::path> bundle_dir(const std::optional<fs::path>& explicit_dir) {
    if (explicit_dir) return explicit_dir;
    if (const char* env = std::getenv("PAINBENCH_WEIGHTS")) return fs::path(env);
    return std::nullopt;
}

}  // namespace

Classifier build(const std::string& architecture_name,
                 const std::optional<fs::path>& pretrained_dir) {
    const ArchitectureSpec& spec = architecture(architecture_name);
    Classifier clf;
    clf.spec = spec;

    if (spec.pretrained) {
        auto dir = bundle_dir(pretrained_dir);
        fs::path bundle;
        if (dir) bundle = *dir / (spec.name + ".pbnet");
        if (!dir || !fs::exists(bundle))
            fail("MissingPretrainedWeights",
                 spec.name + " needs a local ImageNet bundle (" + spec.name +
                     ".pbnet under PAINBENCH_WEIGHTS); none found");
        auto net = make_net(spec.name);
        if (!net)
            fail("MissingPretrainedWeights",
                 spec.name + " backbone graph is only loadable from a bundle built for this "
                             "engine; the found bundle cannot be attached");
        net->load(bundle);
        clf.net = std::move(net);
        return clf;
    }

    auto net = make_net(spec.name);
    if (!net) fail("UnknownArchitecture", "no builder for " + spec.name);
    nn::Rng rng(fnv1a(spec.name, 0x9e3779b97f4a7c15ull));
    net->init(rng);
    clf.net = std::move(net);
    return clf;
}

uint64_t corpus_fingerprint(const std::vector<LabeledImage>& samples) {
    uint64_t h = fnv1a("painbench-corpus-v1");
    for (const auto& s : samples) {
        h = fnv1a(s.image.sample_id, h);
        h = fnv1a(s.label == data::PainClass::PAIN ? "p" : "n", h);
    }
    return h;
}

static Prediction to_prediction(const nn::Tensor& logits) {
    auto r = nn::softmax_cross_entropy(logits, 0);  // label unused for probs
    Prediction p;
    p.p_no_pain = r.probs[0];
    p.p_pain = r.probs[1];
    p.predicted = p.p_pain > p.p_no_pain ? data::PainClass::PAIN : data::PainClass::NO_PAIN;
    return p;
}

TrainedModelRecord train(Classifier& classifier, const std::vector<LabeledImage>& samples,
                         const TrainConfig& config) {
    config.validate();
    if (samples.empty()) fail("EmptyCorpus", "no training samples");
    bool has_pain = false, has_no_pain = false;
    for (const auto& s : samples) {
        (s.label == data::PainClass::PAIN ? has_pain : has_no_pain) = true;
        if (s.image.side != classifier.spec.input_side)
            fail("ShapeMismatch", "sample " + s.image.sample_id + " side " +
                                      std::to_string(s.image.side) + " != " +
                                      std::to_string(classifier.spec.input_side));
    }
    if (!has_pain || !has_no_pain)
        fail("SingleClassCorpus", "training corpus must contain both classes");

    std::vector<nn::Tensor> tensors;
    std::vector<int> labels;
    tensors.reserve(samples.size());
    for (const auto& s : samples) {
        tensors.push_back(nn::to_tensor(s.image.pixels));
        labels.push_back(s.label == data::PainClass::PAIN ? 1 : 0);
    }

    nn::Rng rng(config.seed ^ fnv1a(classifier.spec.name));
    nn::Network& net = *classifier.net;
    nn::Adam optimizer(net.param_views(), config.learning_rate);

    TrainedModelRecord record;
    record.architecture = classifier.spec;
    record.config = config;
    record.train_corpus_fingerprint = corpus_fingerprint(samples);
    record.net = classifier.net;

    const int n = static_cast<int>(samples.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        // Fisher-Yates with the run RNG keeps shuffles seed-determined.
        for (int i = n - 1; i > 0; --i)
            std::swap(order[i], order[static_cast<int>(rng.integer(i + 1))]);

        double loss_sum = 0;
        for (int start = 0; start < n; start += config.batch_size) {
            int end = std::min(n, start + config.batch_size);
            net.zero_grads();
            for (int b = start; b < end; ++b) {
                int idx = order[b];
                nn::Tensor x = nn::augment(tensors[idx], config.augmentation, rng);
                nn::Tensor logits = net.forward(x);
                auto lr = nn::softmax_cross_entropy(logits, labels[idx]);
                loss_sum += lr.loss;
                nn::Tensor grad(2, 1, 1);
                grad.data = lr.grad / (end - start);
                net.backward(grad);
            }
            optimizer.step(net.grad_views());
        }

        int correct = 0;
        for (int i = 0; i < n; ++i) {
            nn::Tensor logits = net.forward(tensors[i]);
            Prediction p = to_prediction(logits);
            int pred = p.predicted == data::PainClass::PAIN ? 1 : 0;
            if (pred == labels[i]) ++correct;
        }
        record.training_log.push_back(
            {epoch, loss_sum / n, static_cast<double>(correct) / n});
    }
    return record;
}

Prediction predict(const TrainedModelRecord& record, const prep::PreprocessedImage& image) {
    if (image.side != record.architecture.input_side)
        fail("ShapeMismatch", "image side " + std::to_string(image.side) + " != architecture " +
                                  std::to_string(record.architecture.input_side));
    nn::Tensor logits = record.net->forward(nn::to_tensor(image.pixels));
    return to_prediction(logits);
}

void save_record(const TrainedModelRecord& record, const fs::path& dir) {
    fs::create_directories(dir);
    record.net->save(dir / "weights.pbnet");
    csv::Table log;
    log.header = {"epoch", "loss", "accuracy"};
    for (const auto& e : record.training_log) {
        char loss[32], acc[32];
        std::snprintf(loss, sizeof(loss), "%.17g", e.loss);
        std::snprintf(acc, sizeof(acc), "%.17g", e.accuracy);
        log.rows.push_back({std::to_string(e.epoch), loss, acc});
    }
    csv::write_file(dir / "log.csv", log);
}

TrainedModelRecord load_record(const fs::path& dir, const std::string& architecture_name,
                               const TrainConfig& config) {
    TrainedModelRecord record;
    record.architecture = architecture(architecture_name);
    record.config = config;
    record.weights_path = dir / "weights.pbnet";
    auto net = std::make_shared<nn::Network>();
    auto built = make_net(architecture_name);
    if (!built) fail("UnknownArchitecture", "cannot rebuild graph for " + architecture_name);
    net = std::shared_ptr<nn::Network>(std::move(built));
    net->load(record.weights_path);
    record.net = net;
    auto log = csv::read_file(dir / "log.csv");
    for (const auto& row : log.rows)
        record.training_log.push_back(
            {std::stoi(row[0]), std::stod(row[1]), std::stod(row[2])});
    return record;
}

}  // namespace painbench::zoo
