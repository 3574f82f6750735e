#include <doctest.h>

#include <algorithm>
#include <cstdlib>

#include "helpers.hpp"
#include "painbench/error.hpp"
#include "painbench/fixtures.hpp"
#include "painbench/model_zoo.hpp"

using namespace painbench;

namespace {

// Small separable training set built from the schematic face fixture.
std::vector<zoo::LabeledImage> fixture_set(int per_class, int side, uint64_t seed) {
    std::vector<zoo::LabeledImage> out;
    for (int i = 0; i < per_class; ++i) {
        for (auto cls : {data::PainClass::NO_PAIN, data::PainClass::PAIN}) {
            zoo::LabeledImage li;
            cv::Mat face = fixtures::render_face(side, cls, seed + static_cast<uint64_t>(i) * 2 +
                                                                (cls == data::PainClass::PAIN),
                                                 nullptr);
            li.image.pixels = face;
            li.image.side = side;
            li.image.sample_id = "fix:" + std::to_string(i) + ":" + data::to_string(cls);
            li.label = cls;
            out.push_back(std::move(li));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("scratch architectures build with the registered parameter counts") {
    for (const char* name : {"tiny_cnn", "songnet", "weinet", "silnet", "alexnet"}) {
        zoo::Classifier clf = zoo::build(name);
        CHECK(clf.spec.name == name);
        CHECK(clf.net->param_count() == clf.spec.param_count);
        CHECK_FALSE(clf.spec.pretrained);
    }
}

TEST_CASE("pretrained architectures need a local weight bundle") {
    unsetenv("PAINBENCH_WEIGHTS");
    for (const char* name :
         {"vgg16", "vgg19", "resnet50", "resnet101v2", "inception_v3", "xception"}) {
        CHECK(zoo::architecture(name).pretrained);
        CHECK_THROWS_WITH_AS(zoo::build(name), doctest::Contains("MissingPretrainedWeights"),
                             PipelineError);
    }
    CHECK_THROWS_WITH_AS(zoo::build("lenet"), doctest::Contains("UnknownArchitecture"),
                         PipelineError);
}

TEST_CASE("train config validation") {
    zoo::TrainConfig config;
    CHECK_NOTHROW(config.validate());
    config.epochs = 0;
    CHECK_THROWS_AS(config.validate(), PipelineError);
    config.epochs = 30;
    config.learning_rate = -1;
    CHECK_THROWS_AS(config.validate(), PipelineError);
}

TEST_CASE("training improves accuracy and is seed-deterministic") {
    auto samples = fixture_set(6, 64, 100);
    zoo::TrainConfig config;
    config.epochs = 10;
    config.batch_size = 4;
    config.seed = 11;

    zoo::Classifier clf = zoo::build("tiny_cnn");
    zoo::TrainedModelRecord record = zoo::train(clf, samples, config);
    REQUIRE(record.training_log.size() == 10);
    double best = 0;
    for (const auto& e : record.training_log) best = std::max(best, e.accuracy);
    CHECK(best >= 0.75);
    CHECK(record.training_log.back().loss < record.training_log.front().loss);
    CHECK(record.train_corpus_fingerprint == zoo::corpus_fingerprint(samples));

    zoo::Classifier clf2 = zoo::build("tiny_cnn");
    zoo::TrainedModelRecord rerun = zoo::train(clf2, samples, config);
    for (size_t e = 0; e < record.training_log.size(); ++e) {
        CHECK(rerun.training_log[e].loss == record.training_log[e].loss);
        CHECK(rerun.training_log[e].accuracy == record.training_log[e].accuracy);
    }

    SUBCASE("prediction probabilities are a proper distribution") {
        zoo::Prediction p = zoo::predict(record, samples.front().image);
        CHECK(p.p_no_pain + p.p_pain == doctest::Approx(1.0));
        CHECK((p.predicted == data::PainClass::NO_PAIN || p.predicted == data::PainClass::PAIN));
    }

    SUBCASE("record save/load round trip preserves predictions") {
        auto dir = test_dir("zoo_record");
        zoo::save_record(record, dir);
        CHECK(std::filesystem::exists(dir / "weights.pbnet"));
        CHECK(std::filesystem::exists(dir / "log.csv"));

        zoo::TrainedModelRecord loaded = zoo::load_record(dir, "tiny_cnn", config);
        REQUIRE(loaded.training_log.size() == record.training_log.size());
        CHECK(loaded.training_log.back().loss == record.training_log.back().loss);
        for (const auto& s : samples) {
            zoo::Prediction a = zoo::predict(record, s.image);
            zoo::Prediction b = zoo::predict(loaded, s.image);
            CHECK(a.p_pain == b.p_pain);
            CHECK(a.predicted == b.predicted);
        }
    }
}

TEST_CASE("training input validation") {
    zoo::TrainConfig config;
    config.epochs = 1;
    zoo::Classifier clf = zoo::build("tiny_cnn");

    CHECK_THROWS_WITH_AS(zoo::train(clf, {}, config), doctest::Contains("EmptyCorpus"),
                         PipelineError);

    auto one_class = fixture_set(2, 64, 5);
    one_class.erase(std::remove_if(one_class.begin(), one_class.end(),
                                   [](const zoo::LabeledImage& s) {
                                       return s.label == data::PainClass::PAIN;
                                   }),
                    one_class.end());
    CHECK_THROWS_WITH_AS(zoo::train(clf, one_class, config),
                         doctest::Contains("SingleClassCorpus"), PipelineError);

    auto wrong_side = fixture_set(2, 48, 5);
    CHECK_THROWS_WITH_AS(zoo::train(clf, wrong_side, config), doctest::Contains("ShapeMismatch"),
                         PipelineError);
}
