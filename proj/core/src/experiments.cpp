#include "painbench/experiments.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "painbench/csv.hpp"
#include "painbench/error.hpp"
#include "painbench/hash.hpp"

namespace fs = std::filesystem;

namespace painbench::experiments {

Scenario parse_scenario(const std::string& s) {
    if (s == "image_centric_cv") return Scenario::image_centric_cv;
    if (s == "subject_centric_cv") return Scenario::subject_centric_cv;
    if (s == "external_test") return Scenario::external_test;
    fail("MissingField", "'" + s + "' is not a scenario");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::image_centric_cv: return "image_centric_cv";
        case Scenario::subject_centric_cv: return "subject_centric_cv";
        case Scenario::external_test: return "external_test";
    }
    return "?";
}

SplitPlan make_splits(const data::Corpus& corpus, Scenario scenario, int k, uint64_t seed,
                      const data::Corpus* external) {
    SplitPlan plan;
    plan.scenario = scenario;
    plan.k = k;
    plan.seed = seed;
    plan.samples = corpus.samples;

    nn::Rng rng(seed ^ fnv1a(to_string(scenario)));
    auto shuffle = [&rng](auto& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
            std::swap(v[i], v[static_cast<int>(rng.integer(i + 1))]);
    };

    if (scenario == Scenario::external_test) {
        if (!external) fail("MissingField", "external_test needs an external corpus");
        if (corpus.samples.empty() || external->samples.empty())
            fail("TooFewImages", "external_test needs non-empty corpora");
        int n = static_cast<int>(corpus.samples.size());
        plan.samples.insert(plan.samples.end(), external->samples.begin(),
                            external->samples.end());
        for (int i = 0; i < k; ++i) {
            Fold fold;
            fold.train.resize(n);
            std::iota(fold.train.begin(), fold.train.end(), 0);
            fold.test.resize(external->samples.size());
            std::iota(fold.test.begin(), fold.test.end(), n);
            fold.seed = seed + 1 + i;
            plan.folds.push_back(std::move(fold));
        }
        return plan;
    }

    if (k < 2) fail("TooFewImages", "cross-validation needs k >= 2");
    int n = static_cast<int>(corpus.samples.size());

    if (scenario == Scenario::image_centric_cv) {
        if (n < k) fail("TooFewImages", std::to_string(n) + " images for k=" + std::to_string(k));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffle(order);
        int base = n / k, rem = n % k;
        int pos = 0;
        for (int i = 0; i < k; ++i) {
            int size = base + (i < rem ? 1 : 0);
            Fold fold;
            fold.test.assign(order.begin() + pos, order.begin() + pos + size);
            for (int j = 0; j < n; ++j)
                if (j < pos || j >= pos + size) fold.train.push_back(order[j]);
            fold.seed = seed + 1 + i;
            pos += size;
            plan.folds.push_back(std::move(fold));
        }
        return plan;
    }

    // subject_centric_cv
    std::set<data::SubjectID> subject_set;
    for (const auto& s : corpus.samples) subject_set.insert(s.subject);
    std::vector<data::SubjectID> subjects(subject_set.begin(), subject_set.end());
    if (static_cast<int>(subjects.size()) < k)
        fail("TooFewSubjects",
             std::to_string(subjects.size()) + " subjects for k=" + std::to_string(k));
    shuffle(subjects);
    int ns = static_cast<int>(subjects.size());
    int base = ns / k, rem = ns % k;
    int pos = 0;
    for (int i = 0; i < k; ++i) {
        int size = base + (i < rem ? 1 : 0);
        std::set<data::SubjectID> test_subjects(subjects.begin() + pos,
                                                subjects.begin() + pos + size);
        Fold fold;
        for (int j = 0; j < n; ++j)
            (test_subjects.count(corpus.samples[j].subject) ? fold.test : fold.train).push_back(j);
        fold.seed = seed + 1 + i;
        pos += size;
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

static ClassMetrics class_metrics(double tp, double fp, double fn) {
    ClassMetrics m;
    m.support = static_cast<int>(std::lround(tp + fn));
    m.precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

static FoldReport report_from_confusion(const std::array<std::array<double, 2>, 2>& c) {
    FoldReport r;
    r.confusion = c;
    double total = c[0][0] + c[0][1] + c[1][0] + c[1][1];
    r.accuracy = total > 0 ? (c[0][0] + c[1][1]) / total : 0.0;
    r.pain = class_metrics(c[1][1], c[0][1], c[1][0]);
    r.no_pain = class_metrics(c[0][0], c[1][0], c[0][1]);
    r.macro_f1 = (r.pain.f1 + r.no_pain.f1) / 2.0;
    return r;
}

FoldReport metrics_from_predictions(const std::vector<int>& labels,
                                    const std::vector<int>& predictions) {
    if (labels.size() != predictions.size() || labels.empty())
        fail("EmptyTestSet", "label/prediction vectors empty or mismatched");
    std::array<std::array<double, 2>, 2> c{};
    for (size_t i = 0; i < labels.size(); ++i) c[labels[i]][predictions[i]] += 1.0;
    return report_from_confusion(c);
}

FoldReport evaluate(const zoo::TrainedModelRecord& record,
                    const std::vector<zoo::LabeledImage>& test_samples,
                    std::vector<SamplePrediction>* predictions_out) {
    if (test_samples.empty()) fail("EmptyTestSet", "no test samples");
    std::vector<int> labels, preds;
    for (const auto& s : test_samples) {
        zoo::Prediction p = zoo::predict(record, s.image);
        labels.push_back(s.label == data::PainClass::PAIN ? 1 : 0);
        preds.push_back(p.predicted == data::PainClass::PAIN ? 1 : 0);
        if (predictions_out)
            predictions_out->push_back({s.image.sample_id, labels.back(), p});
    }
    return metrics_from_predictions(labels, preds);
}

namespace {

FoldReport apply_stat(const std::vector<FoldReport>& folds,
                      const std::function<double(std::vector<double>&)>& stat) {
    FoldReport out;
    auto reduce = [&](auto getter, auto setter) {
        std::vector<double> values;
        for (const auto& f : folds) values.push_back(getter(f));
        setter(out, stat(values));
    };
    reduce([](const FoldReport& f) { return f.accuracy; },
           [](FoldReport& o, double v) { o.accuracy = v; });
    reduce([](const FoldReport& f) { return f.macro_f1; },
           [](FoldReport& o, double v) { o.macro_f1 = v; });
    for (auto member : {&FoldReport::no_pain, &FoldReport::pain}) {
        reduce([member](const FoldReport& f) { return (f.*member).precision; },
               [member](FoldReport& o, double v) { (o.*member).precision = v; });
        reduce([member](const FoldReport& f) { return (f.*member).recall; },
               [member](FoldReport& o, double v) { (o.*member).recall = v; });
        reduce([member](const FoldReport& f) { return (f.*member).f1; },
               [member](FoldReport& o, double v) { (o.*member).f1 = v; });
        std::vector<double> supports;
        for (const auto& f : folds) supports.push_back((f.*member).support);
        (out.*member).support = static_cast<int>(std::lround(stat(supports)));
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            reduce([i, j](const FoldReport& f) { return f.confusion[i][j]; },
                   [i, j](FoldReport& o, double v) { o.confusion[i][j] = v; });
    return out;
}

}  // namespace

FoldReport average_folds(const std::vector<FoldReport>& folds) {
    if (folds.empty()) fail("EmptyTestSet", "no folds to average");
    return apply_stat(folds, [](std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / v.size();
    });
}

FoldReport stddev_folds(const std::vector<FoldReport>& folds) {
    if (folds.empty()) fail("EmptyTestSet", "no folds");
    return apply_stat(folds, [](std::vector<double>& v) {
        double mean = 0;
        for (double x : v) mean += x;
        mean /= v.size();
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / v.size());
    });
}

namespace {

std::string config_signature(const zoo::TrainConfig& c) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "e%d lr%.12g b%d rot%.6g mir%d con%.6g-%.6g", c.epochs,
                  c.learning_rate, c.batch_size, c.augmentation.rotation_degrees,
                  c.augmentation.mirror ? 1 : 0, c.augmentation.contrast_lo,
                  c.augmentation.contrast_hi);
    return buf;
}

uint64_t job_fingerprint(const SplitPlan& plan, const Fold& fold, const std::string& arch,
                         const zoo::TrainConfig& config) {
    uint64_t h = fnv1a("painbench-job-v1");
    h = fnv1a(arch, h);
    h = fnv1a(config_signature(config), h);
    h = fnv1a(std::to_string(fold.seed), h);
    for (int i : fold.train) h = fnv1a(plan.samples[i].id() + "|", h);
    h = fnv1a("/", h);
    for (int i : fold.test) h = fnv1a(plan.samples[i].id() + "|", h);
    return h;
}

FoldReport fold_report_from_predictions_csv(const fs::path& path,
                                            std::vector<SamplePrediction>* out = nullptr) {
    auto table = csv::read_file(path);
    int c_id = table.require_column("sample_id");
    int c_label = table.require_column("label");
    int c_pn = table.require_column("p_no_pain");
    int c_pp = table.require_column("p_pain");
    int c_pred = table.require_column("predicted");
    std::vector<int> labels, preds;
    for (const auto& row : table.rows) {
        int label = row[c_label] == "pain" ? 1 : 0;
        int pred = row[c_pred] == "pain" ? 1 : 0;
        labels.push_back(label);
        preds.push_back(pred);
        if (out) {
            zoo::Prediction p;
            p.p_no_pain = std::stod(row[c_pn]);
            p.p_pain = std::stod(row[c_pp]);
            p.predicted = pred ? data::PainClass::PAIN : data::PainClass::NO_PAIN;
            out->push_back({row[c_id], label, p});
        }
    }
    return metrics_from_predictions(labels, preds);
}

void write_predictions_csv(const fs::path& path, const std::vector<SamplePrediction>& preds) {
    csv::Table table;
    table.header = {"sample_id", "label", "p_no_pain", "p_pain", "predicted"};
    for (const auto& p : preds) {
        char pn[32], pp[32];
        std::snprintf(pn, sizeof(pn), "%.17g", p.prediction.p_no_pain);
        std::snprintf(pp, sizeof(pp), "%.17g", p.prediction.p_pain);
        table.rows.push_back({p.sample_id, p.label ? "pain" : "no_pain", pn, pp,
                              data::to_string(p.prediction.predicted)});
    }
    csv::write_file(path, table);
}

}  // namespace

std::vector<EvaluationReport> run_scenario(const SplitPlan& plan,
                                           const std::vector<std::string>& architectures,
                                           const zoo::TrainConfig& config,
                                           const SampleLoader& loader, const fs::path& run_dir,
                                           int jobs) {
    struct Job {
        std::string arch;
        int fold = 0;
    };
    std::vector<Job> job_list;
    for (const auto& arch : architectures)
        for (size_t f = 0; f < plan.folds.size(); ++f)
            job_list.push_back({arch, static_cast<int>(f)});

    std::vector<std::vector<FoldReport>> results(architectures.size(),
                                                 std::vector<FoldReport>(plan.folds.size()));
    auto arch_index = [&](const std::string& name) {
        for (size_t i = 0; i < architectures.size(); ++i)
            if (architectures[i] == name) return i;
        fail("UnknownArchitecture", name);
    };

    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            size_t idx = next.fetch_add(1);
            if (idx >= job_list.size()) return;
            const Job& job = job_list[idx];
            try {
                const Fold& fold = plan.folds[job.fold];
                zoo::TrainConfig fold_config = config;
                fold_config.seed = fold.seed;
                uint64_t fp = job_fingerprint(plan, fold, job.arch, fold_config);

                fs::path dir = run_dir / to_string(plan.scenario) / job.arch /
                               ("fold" + std::to_string(job.fold));
                fs::path fp_file = dir / "fingerprint.txt";
                fs::path pred_file = dir / "predictions.csv";

                if (fs::exists(fp_file) && fs::exists(pred_file)) {
                    std::ifstream in(fp_file);
                    std::string stored;
                    in >> stored;
                    if (stored == hex64(fp)) {
                        results[arch_index(job.arch)][job.fold] =
                            fold_report_from_predictions_csv(pred_file);
                        continue;
                    }
                }

                std::vector<zoo::LabeledImage> train_set, test_set;
                for (int i : fold.train) train_set.push_back(loader(plan.samples[i], job.arch));
                for (int i : fold.test) test_set.push_back(loader(plan.samples[i], job.arch));

                zoo::Classifier clf = zoo::build(job.arch);
                zoo::TrainedModelRecord record = zoo::train(clf, train_set, fold_config);

                std::vector<SamplePrediction> preds;
                FoldReport report = evaluate(record, test_set, &preds);

                fs::create_directories(dir);
                zoo::save_record(record, dir);
                write_predictions_csv(pred_file, preds);
                std::ofstream out(fp_file);
                out << hex64(fp) << '\n';

                results[arch_index(job.arch)][job.fold] = report;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(job_list.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<EvaluationReport> reports;
    for (size_t a = 0; a < architectures.size(); ++a) {
        EvaluationReport r;
        r.architecture = architectures[a];
        r.scenario = to_string(plan.scenario);
        r.per_fold = results[a];
        r.averaged = average_folds(r.per_fold);
        r.stddev = stddev_folds(r.per_fold);
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace painbench::experiments
