#include "ptai/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ptai/cli/config.hpp"
#include "ptai/core/checksum.hpp"
#include "ptai/data/batch.hpp"
#include "ptai/data/formats.hpp"
#include "ptai/data/shapes.hpp"
#include "ptai/eval/metrics.hpp"
#include "ptai/eval/report.hpp"
#include "ptai/losses/gradcheck.hpp"
#include "ptai/nn/checkpoint.hpp"
#include "ptai/nn/train.hpp"

#ifndef PTAI_GIT_DESCRIBE
#define PTAI_GIT_DESCRIBE "unknown"
#endif

namespace ptai::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::collapse: return exit_collapse;
        case ErrorKind::numerical: return exit_internal;
        default: return exit_usage;
    }
}

namespace {

// Internal parallelism cap from AIFT_THREADS. Computation is currently
// single-threaded, so the value is validated and recorded only.
std::size_t thread_cap() {
    const char* env = std::getenv("AIFT_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    require(end && *end == '\0' && v >= 1, ErrorKind::invalid_config, "AIFT_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
}

struct Loaded {
    std::optional<data::FeatureDataset> features;
    std::optional<data::ImageDataset> images;
    std::string description;

    std::size_t size() const { return features ? features->size() : images->size(); }
};

Loaded load_split(const std::string& path, const SynthConfig& synth, data::Split split) {
    Loaded l;
    const char* tag = split == data::Split::train ? "train" : "test";
    if (path.empty()) {
        const std::size_t n = split == data::Split::train ? synth.n_per_class : synth.test_n_per_class;
        l.images = data::gen_shapes(n, synth.classes, synth.image_size, synth.jitter,
                                    RngStream(synth.seed).split(tag), split);
        l.description = "synthetic shapes (" + std::string(tag) + ")";
        return l;
    }
    const fs::path p(path);
    if (fs::is_directory(p)) {
        l.images = data::load_idx(p / (std::string(tag) + "-images.idx"), p / (std::string(tag) + "-labels.idx"));
        l.images->split = split;
        l.description = p.string() + " (" + tag + " IDX)";
        return l;
    }
    require(fs::exists(p), ErrorKind::io, "dataset '" + path + "' does not exist");
    l.features = data::load_aift(p);
    l.description = p.string();
    return l;
}

// Held-out split: explicit path, else the test files of an IDX directory or
// the synthetic test set, else the training file itself.
Loaded load_test_split(const DatasetConfig& cfg, const std::string& override_path) {
    const std::string& explicit_path = !override_path.empty() ? override_path : cfg.test_path;
    if (!explicit_path.empty()) {
        if (fs::is_directory(explicit_path)) return load_split(explicit_path, cfg.synth, data::Split::test);
        return load_split(explicit_path, cfg.synth, data::Split::test);
    }
    if (cfg.path.empty()) return load_split("", cfg.synth, data::Split::test);
    if (fs::is_directory(cfg.path) && fs::exists(fs::path(cfg.path) / "test-images.idx"))
        return load_split(cfg.path, cfg.synth, data::Split::test);
    return load_split(cfg.path, cfg.synth, data::Split::train);
}

// Clean features, labels, and augmented rows with their source rows.
struct EvalSet {
    Matrix clean;
    std::vector<std::size_t> labels;
    Matrix aug;
    std::vector<std::size_t> source;
};

EvalSet eval_set(const Loaded& l, const augment::Composite& chain, std::size_t s, const RngStream& rng) {
    EvalSet e;
    if (l.features) {
        const auto& ds = *l.features;
        e.clean = ds.clean;
        e.labels = data::to_size_labels(ds.labels);
        e.aug = ds.aug;
        for (std::size_t r = 0; r < ds.aug.rows(); ++r) e.source.push_back(r / ds.s_file);
        return e;
    }
    const auto& ds = *l.images;
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto ensemble = augment::AugmentationEnsemble::two_element(chain, s);
    const auto batch = data::make_batch(ds, all, ensemble, s, rng);
    e.clean = batch.clean;
    e.labels = batch.labels;
    e.aug = batch.augmented;
    e.source = batch.augmented_sources();
    return e;
}

std::string hex32(std::uint32_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(8) << std::setfill('0') << v;
    return os.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec && fs::is_directory(dir), ErrorKind::io, "cannot create directory '" + dir.string() + "'");
}

// ---------------------------------------------------------------- gen-synth

struct GenSynthArgs {
    std::size_t classes = 4, n = 500, test_n = 0, size = 28, features = 0, s_file = 3;
    double jitter = 0.05;
    std::uint64_t seed = 1;
    std::string out = "synth", aug = "rotation";
};

int cmd_gen_synth(const GenSynthArgs& a, std::ostream& out) {
    const fs::path dir(a.out);
    ensure_dir(dir);
    const std::size_t test_n = a.test_n ? a.test_n : std::max<std::size_t>(1, a.n / 4);
    const RngStream root(a.seed);
    const auto train = data::gen_shapes(a.n, a.classes, a.size, a.jitter, root.split("train"), data::Split::train);
    const auto test = data::gen_shapes(test_n, a.classes, a.size, a.jitter, root.split("test"), data::Split::test);
    data::save_idx(train, dir / "train-images.idx", dir / "train-labels.idx");
    data::save_idx(test, dir / "test-images.idx", dir / "test-labels.idx");
    const auto check = data::load_idx(dir / "train-images.idx", dir / "train-labels.idx");
    require(check.size() == train.size() && check.labels == train.labels, ErrorKind::io, "IDX reload mismatch");

    json meta = {{"generator", "shapes"},
                 {"classes", a.classes},
                 {"n_per_class", a.n},
                 {"test_n_per_class", test_n},
                 {"image_size", a.size},
                 {"jitter", a.jitter},
                 {"seed", a.seed},
                 {"class_names", json::array()}};
    for (std::size_t c = 0; c < a.classes; ++c) meta["class_names"].push_back(data::shape_name(c));

    if (a.features > 0) {
        const auto chain = augment::parse_composite(a.aug);
        const auto proj = data::RandomProjection::gaussian(a.size * a.size, a.features, root.split("projection"));
        const auto ensemble = augment::AugmentationEnsemble::two_element(chain, a.s_file);
        json fmeta = {{"augmentation", augment::describe(chain)},
                      {"normalization", "pixels in [0, 1], augmented before projection"},
                      {"source", "shapes via frozen gaussian projection " + std::to_string(a.size * a.size) + "->" +
                                     std::to_string(a.features)},
                      {"seed", a.seed}};
        auto write_split = [&](const data::ImageDataset& ds, const char* tag) {
            std::vector<std::size_t> all(ds.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            const auto b = data::make_batch(ds, all, ensemble, a.s_file, root.split("features").split(tag), &proj);
            data::FeatureDataset fd{b.clean, ds.labels, ds.classes, b.augmented, a.s_file, fmeta.dump()};
            const fs::path path = dir / (std::string(tag) + ".aift");
            data::save_aift(fd, path);
            const auto bytes = data::read_file(path);
            data::decode_aift(bytes);  // verifies the checksum
            meta[std::string(tag) + "_aift_crc"] = hex32(crc32(std::span(bytes).first(bytes.size() - 4)));
        };
        write_split(train, "train");
        write_split(test, "test");
        meta["features"] = fmeta;
        meta["feature_dim"] = a.features;
        meta["s_file"] = a.s_file;
    }
    eval::write_json(dir / "metadata.json", meta);
    out << "wrote " << train.size() << " train and " << test.size() << " test images to " << dir.string() << '\n';
    return exit_ok;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
    std::string config, loss, aug, dataset, out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs, hidden, out_dim, batch_size, s;
    bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
    if (!a.loss.empty()) cfg.train.loss.kind = losses::parse_loss_kind(a.loss);
    if (!a.aug.empty()) cfg.augment.name = a.aug;
    if (!a.dataset.empty()) cfg.dataset.path = a.dataset;
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.seed) cfg.train.seed = *a.seed;
    if (a.epochs) cfg.train.epochs = *a.epochs;
    if (a.hidden) cfg.train.hidden = *a.hidden;
    if (a.out_dim) cfg.train.out_dim = *a.out_dim;
    if (a.batch_size) cfg.train.batch_size = *a.batch_size;
    if (a.s) cfg.train.loss.s = *a.s;
    cfg.train.validate();
    const auto chain = cfg.augment.chain();
    const std::size_t threads = thread_cap();

    const Loaded train = load_split(cfg.dataset.path, cfg.dataset.synth, data::Split::train);
    std::unique_ptr<data::BatchSource> source;
    if (train.features) {
        source = std::make_unique<data::FeatureBatchSource>(*train.features);
    } else {
        source = std::make_unique<data::ImageBatchSource>(
            *train.images, augment::AugmentationEnsemble::two_element(chain, cfg.train.loss.s));
    }

    nn::TrainHooks hooks;
    if (!a.quiet)
        hooks.on_epoch = [&](const nn::EpochRecord& r) {
            out << "epoch " << r.epoch + 1 << '/' << cfg.train.epochs << " loss " << r.loss;
            if (std::isfinite(r.correlation)) out << " sc " << r.correlation;
            if (r.collapsed_steps) out << " collapsed " << r.collapsed_steps << '/' << r.steps;
            out << '\n' << std::flush;
        };
    const nn::TrainedAdapter trained = nn::train_adapter(*source, cfg.train, hooks);
    for (const auto& w : trained.history.warnings) err << "warning: " << w << '\n';

    const fs::path dir(cfg.output_dir);
    ensure_dir(dir);
    // Everything that shapes the weights, nothing about where they are written.
    json ckpt_config = cfg.to_json();
    ckpt_config.erase("output_dir");
    json ckpt_meta = {{"loss", losses::to_string(cfg.train.loss.kind)},
                      {"input_dim", source->input_dim()},
                      {"config", ckpt_config}};
    nn::Checkpoint ckpt;
    ckpt.metadata = ckpt_meta.dump();
    ckpt.nets.push_back({nn::NetRole::adapter, nn::ProbeKind::linear, 0, trained.adapter});
    if (trained.decoder) ckpt.nets.push_back({nn::NetRole::decoder, nn::ProbeKind::linear, 0, *trained.decoder});
    const auto bytes = nn::encode_checkpoint(ckpt);
    data::write_file(dir / "adapter.aimk", bytes);
    const std::uint32_t crc = crc32(std::span(bytes).first(bytes.size() - 4));

    eval::write_json(dir / "history.json", eval::to_json(trained.history));
    json run = {{"schema_version", eval::kReportSchemaVersion},
                {"build", PTAI_GIT_DESCRIBE},
                {"config", cfg.to_json()},
                {"dataset", train.description},
                {"dataset_size", train.size()},
                {"augmentation", augment::describe(chain)},
                {"augmentation_resampling", train.features ? "stored views, s of s_file drawn per step"
                                                           : "fresh parameters per input, view and epoch"},
                {"init", "uniform fan-in U(-1/sqrt(fan_in), 1/sqrt(fan_in)), seeded"},
                {"estimator",
                 {{"projections", "resampled every step from the step-keyed stream"},
                  {"correlation_terms", "independent substreams for joint, self-x and self-z"},
                  {"row_order", "canonical lexicographic order before shuffling"}}},
                {"threads", threads},
                {"checkpoint", (dir / "adapter.aimk").string()},
                {"checkpoint_crc32", hex32(crc)},
                {"final_loss", eval::number_or_null(trained.history.final_loss())}};
    eval::write_json(dir / "run.json", run);
    out << "final loss " << trained.history.final_loss() << ", checkpoint " << (dir / "adapter.aimk").string()
        << " crc32 " << hex32(crc) << '\n';
    return exit_ok;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
    std::string checkpoint, dataset, test, probe = "lc", report, embeddings, aug;
    std::optional<std::size_t> probe_epochs, s;
    std::uint64_t seed = 0;
    std::size_t pair_budget = eval::kDefaultPairBudget;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    require(!a.checkpoint.empty(), ErrorKind::invalid_config, "eval: --checkpoint is required");
    require(fs::exists(a.checkpoint), ErrorKind::io, "checkpoint '" + a.checkpoint + "' does not exist");
    const nn::Checkpoint ckpt = nn::load_checkpoint(a.checkpoint);
    const auto* adapter_entry = ckpt.find(nn::NetRole::adapter);
    require(adapter_entry != nullptr, ErrorKind::invalid_input, "checkpoint has no adapter");
    json meta = json::parse(ckpt.metadata, nullptr, false);
    require(!meta.is_discarded() && meta.contains("config"), ErrorKind::corrupt_file, "checkpoint metadata unreadable");
    RunConfig cfg = RunConfig::from_json(meta["config"]);
    if (!a.dataset.empty()) cfg.dataset.path = a.dataset;
    if (!a.aug.empty()) cfg.augment.name = a.aug;
    if (a.probe_epochs) cfg.train.probe_epochs = *a.probe_epochs;
    const auto kind = nn::parse_probe_kind(a.probe);
    const auto chain = cfg.augment.chain();
    const std::size_t s_eval = a.s.value_or(1);

    const Loaded train = load_split(cfg.dataset.path, cfg.dataset.synth, data::Split::train);
    const Loaded test = load_test_split(cfg.dataset, a.test);
    const RngStream root = RngStream(a.seed).split("eval");
    // Disjoint from every training stream, which all derive from the train seed.
    const EvalSet tr = eval_set(train, chain, 0, root.split("train"));
    const EvalSet te = eval_set(test, chain, s_eval, root.split("augment"));
    const nn::AdapterMlp& adapter = adapter_entry->net;
    require(adapter.input_dim() == tr.clean.cols() && adapter.input_dim() == te.clean.cols(),
            ErrorKind::invalid_dimension,
            "adapter expects " + std::to_string(adapter.input_dim()) + " inputs, dataset has " +
                std::to_string(te.clean.cols()));

    const bool through_adapter = kind != nn::ProbeKind::end_to_end;
    const Matrix probe_inputs = through_adapter ? nn::mlp_forward(adapter, tr.clean) : tr.clean;
    nn::TrainConfig probe_cfg = cfg.train;
    probe_cfg.seed = a.seed;
    const auto probe = nn::train_probe(probe_inputs, tr.labels, kind, probe_cfg);
    auto acc = eval::probe_pair_accuracy(probe, through_adapter ? &adapter : nullptr, te.clean, te.aug, te.labels,
                                         te.source);
    acc.loss = through_adapter ? meta.value("loss", std::string("unknown")) : "none";

    std::optional<eval::StructureReport> structure;
    std::optional<eval::CollisionReport> collisions;
    if (through_adapter) {
        structure = eval::structure_report(adapter, te.clean, a.pair_budget, root.split("pairs"));
        const Matrix enc_clean = nn::mlp_forward(adapter, te.clean);
        const Matrix enc_aug = nn::mlp_forward(adapter, te.aug);
        collisions = eval::aligned_collision_rate(enc_clean, te.labels, enc_aug, te.source);
        if (!a.embeddings.empty()) {
            std::vector<std::size_t> aug_labels;
            for (std::size_t src : te.source) aug_labels.push_back(te.labels[src]);
            eval::write_embedding_csv(a.embeddings, enc_clean, te.labels, "clean");
            eval::write_embedding_csv(a.embeddings, enc_aug, aug_labels, "aug", true);
        }
    }
    json report = eval::evaluation_report(acc, structure, collisions);
    report["test_dataset"] = test.description;
    report["augmented_rows"] = te.aug.rows();
    if (!a.report.empty()) eval::write_json(a.report, report);
    out << nn::to_string(kind) << ' ' << report["pair"].get<std::string>() << '\n';
    if (structure)
        out << "r2 " << structure->r2 << " slope " << structure->slope << " rmsd " << structure->rmsd << '\n';
    if (collisions) out << "cr_raw " << collisions->cr_raw << " cr_aligned " << collisions->cr_aligned << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------- collision

struct CollisionArgs {
    std::string dataset, aug = "identity", report;
    bool aligned = false;
    std::size_t s = 1;
    std::uint64_t seed = 0;
};

int cmd_collision(const CollisionArgs& a, std::ostream& out) {
    SynthConfig synth;
    const Loaded l = load_split(a.dataset, synth, data::Split::train);
    const auto chain = augment::parse_composite(a.aug);
    const EvalSet e = eval_set(l, chain, a.s, RngStream(a.seed).split("collision"));
    json j;
    if (a.aligned) {
        j = eval::to_json(eval::aligned_collision_rate(e.clean, e.labels, e.aug, e.source));
    } else {
        j = {{"cr_raw", eval::collision_rate(e.clean, e.labels, e.aug, e.source)}, {"samples", e.aug.rows()}};
    }
    if (!a.report.empty()) eval::write_json(a.report, j);
    out << j.dump() << '\n';
    return exit_ok;
}

// --------------------------------------------------------------- grad-check

struct GradCheckArgs {
    std::string loss;
    std::uint64_t seed = 0;
    bool inject_sign_bug = false;
};

int cmd_grad_check(const GradCheckArgs& a, std::ostream& out) {
    std::vector<losses::LossKind> kinds;
    if (a.loss.empty())
        kinds = {losses::LossKind::mawa, losses::LossKind::waco, losses::LossKind::waco_recon,
                 losses::LossKind::simclr, losses::LossKind::hsic};
    else
        kinds = {losses::parse_loss_kind(a.loss)};
    losses::GradCheckOptions opt;
    opt.seed = a.seed;
    opt.flip_sign = a.inject_sign_bug;
    bool all = true;
    for (const auto kind : kinds) {
        const auto r = losses::check_gradients(kind, opt);
        out << std::left << std::setw(11) << losses::to_string(kind) << " max_rel_error " << std::scientific
            << std::setprecision(3) << r.max_rel_error << std::defaultfloat << " params " << r.parameters_checked
            << (r.passed ? "  ok" : "  FAIL") << '\n';
        all = all && r.passed;
    }
    return all ? exit_ok : exit_internal;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Post-training augmentation invariance adapters"};
    app.require_subcommand(1);

    GenSynthArgs gen;
    auto* g = app.add_subcommand("gen-synth", "Generate the procedural shape dataset (IDX, optional AIFT features)");
    g->add_option("--classes", gen.classes, "Number of glyph classes")->check(CLI::Range(1, 8));
    g->add_option("--n", gen.n, "Training images per class")->check(CLI::PositiveNumber);
    g->add_option("--test-n", gen.test_n, "Test images per class (default n/4)");
    g->add_option("--size", gen.size, "Image side length")->check(CLI::Range(16, 1024));
    g->add_option("--jitter", gen.jitter, "Position/size/thickness jitter")->check(CLI::Range(0.0, 0.49));
    g->add_option("--seed", gen.seed, "Seed");
    g->add_option("--out", gen.out, "Output directory");
    g->add_option("--features", gen.features, "Also write AIFT features of this dimension (0 = off)");
    g->add_option("--aug", gen.aug, "Augmentation for the stored AIFT views");
    g->add_option("--s-file", gen.s_file, "Stored augmentations per input")->check(CLI::PositiveNumber);

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train an adapter");
    t->add_option("--config", tr.config, "JSON run configuration");
    t->add_option("--loss", tr.loss, "mawa|waco|waco-recon|simclr|hsic");
    t->add_option("--aug", tr.aug, "identity|rotation|affine|noise|crop|composite:<a>,<b>");
    t->add_option("--dataset", tr.dataset, "AIFT file or IDX directory (default: synthetic shapes)");
    t->add_option("--out", tr.out, "Output directory");
    t->add_option("--seed", tr.seed, "Training seed");
    t->add_option("--epochs", tr.epochs, "Epochs");
    t->add_option("--hidden", tr.hidden, "Adapter hidden width");
    t->add_option("--out-dim", tr.out_dim, "Adapter output width");
    t->add_option("--batch-size", tr.batch_size, "Batch size");
    t->add_option("--s", tr.s, "Augmentations per input");
    t->add_flag("--quiet", tr.quiet, "No per-epoch progress");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Train a probe and evaluate an adapter");
    e->add_option("--checkpoint", ev.checkpoint, "AIMK checkpoint")->required();
    e->add_option("--dataset", ev.dataset, "Training split for the probe (default: from the checkpoint)");
    e->add_option("--test", ev.test, "Held-out split");
    e->add_option("--probe", ev.probe, "lc|nc|ec");
    e->add_option("--report", ev.report, "JSON report path");
    e->add_option("--embeddings", ev.embeddings, "CSV dump of encoded test points");
    e->add_option("--aug", ev.aug, "Test-time augmentation for image datasets");
    e->add_option("--s", ev.s, "Augmented views per test image");
    e->add_option("--probe-epochs", ev.probe_epochs, "Probe epochs");
    e->add_option("--seed", ev.seed, "Evaluation seed");
    e->add_option("--pair-budget", ev.pair_budget, "Pair budget for structure metrics")->check(CLI::Range(100, 1 << 30));

    CollisionArgs co;
    auto* c = app.add_subcommand("collision", "Collision rate of a dataset's augmented views");
    c->add_option("--dataset", co.dataset, "AIFT file or IDX directory");
    c->add_flag("--aligned", co.aligned, "Also report the rigid-aligned rate");
    c->add_option("--aug", co.aug, "Augmentation for image datasets");
    c->add_option("--s", co.s, "Views per image for image datasets")->check(CLI::PositiveNumber);
    c->add_option("--seed", co.seed, "Seed");
    c->add_option("--report", co.report, "JSON report path");

    GradCheckArgs gc;
    auto* k = app.add_subcommand("grad-check", "Finite-difference check of every loss gradient");
    k->add_option("--loss", gc.loss, "Check a single loss");
    k->add_option("--seed", gc.seed, "Seed");
    k->add_flag("--inject-sign-bug", gc.inject_sign_bug, "Negative control: flip analytic gradients")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return exit_usage;
    }

    try {
        if (g->parsed()) return cmd_gen_synth(gen, out);
        if (t->parsed()) return cmd_train(tr, out, err);
        if (e->parsed()) return cmd_eval(ev, out);
        if (c->parsed()) return cmd_collision(co, out);
        if (k->parsed()) return cmd_grad_check(gc, out);
    } catch (const Error& ex) {
        err << "error: " << ex.what() << '\n';
        return exit_code_for(ex.kind());
    } catch (const std::exception& ex) {
        err << "internal error: " << ex.what() << '\n';
        return exit_internal;
    }
    return exit_usage;
}

}  // namespace ptai::cli
