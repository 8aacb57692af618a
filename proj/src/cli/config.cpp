#include "ptai/cli/config.hpp"

#include <fstream>
#include <set>

#include "ptai/core/error.hpp"

namespace ptai::cli {

using nlohmann::json;

namespace {

// Reads keys of one JSON object, rejecting any key not consumed by the caller.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j_.is_object(), ErrorKind::invalid_config, "config: '" + path_ + "' must be an object");
    }
    void done() const {
        for (const auto& [key, _] : j_.items())
            require(used_.count(key) > 0, ErrorKind::invalid_config,
                    "config: unknown key '" + path_ + (path_.empty() ? "" : ".") + key + "'");
    }

    const json* get(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (const json* v = get(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                fail(ErrorKind::invalid_config, "config: '" + where(key) + "' has the wrong type");
            }
        }
    }

    void read_interval(const std::string& key, augment::Interval& out) {
        if (const json* v = get(key)) {
            require(v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number(),
                    ErrorKind::invalid_config, "config: '" + where(key) + "' must be [lo, hi]");
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    std::string where(const std::string& key) const { return path_ + (path_.empty() ? "" : ".") + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

json interval(const augment::Interval& iv) { return json::array({iv.lo, iv.hi}); }

}  // namespace

augment::Composite AugmentConfig::chain() const {
    auto c = augment::parse_composite(name);
    for (auto& spec : c) {
        const auto kind = spec.kind;
        spec = ranges;
        spec.kind = kind;
        spec.validate();
    }
    return c;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    Section root(j, "");
    if (const json* t = root.get("train")) {
        Section s(*t, "train");
        s.read("batch_size", c.train.batch_size);
        s.read("epochs", c.train.epochs);
        s.read("learning_rate", c.train.learning_rate);
        s.read("weight_decay", c.train.weight_decay);
        s.read("lr_min", c.train.lr_min);
        s.read("seed", c.train.seed);
        s.read("hidden", c.train.hidden);
        if (const json* v = s.get("out_dim")) {
            require(v->is_number_unsigned(), ErrorKind::invalid_config, "config: 'train.out_dim' must be a count");
            c.train.out_dim = v->get<std::size_t>();
        }
        s.read("probe_epochs", c.train.probe_epochs);
        s.read("probe_weight_decay", c.train.probe_weight_decay);
        s.read("probe_hidden", c.train.probe_hidden);
        s.read("collapse_patience", c.train.collapse_patience);
        s.done();
    }
    if (const json* l = root.get("loss")) {
        Section s(*l, "loss");
        std::string kind = losses::to_string(c.train.loss.kind);
        s.read("kind", kind);
        c.train.loss.kind = losses::parse_loss_kind(kind);
        s.read("s", c.train.loss.s);
        s.read("alpha", c.train.loss.alpha);
        s.read("beta", c.train.loss.beta);
        s.read("temperature", c.train.loss.temperature);
        if (const json* bw = s.get("hsic_bandwidth")) {
            if (bw->is_string()) {
                require(bw->get<std::string>() == "median", ErrorKind::invalid_config,
                        "config: 'loss.hsic_bandwidth' must be \"median\" or a number");
                c.train.loss.hsic_bandwidth.median_heuristic = true;
            } else {
                require(bw->is_number(), ErrorKind::invalid_config,
                        "config: 'loss.hsic_bandwidth' must be \"median\" or a number");
                c.train.loss.hsic_bandwidth = {false, bw->get<double>()};
            }
        }
        s.done();
    }
    if (const json* o = root.get("ot")) {
        Section s(*o, "ot");
        s.read("order", c.train.loss.ot.order);
        s.read("num_projections", c.train.loss.ot.num_projections);
        s.read("shuffle_both", c.train.loss.ot.shuffle_both);
        s.read("epsilon_guard", c.train.loss.ot.epsilon_guard);
        s.read("num_shuffles", c.train.loss.ot.num_shuffles);
        s.done();
    }
    if (const json* a = root.get("augment")) {
        Section s(*a, "augment");
        s.read("name", c.augment.name);
        auto& r = c.augment.ranges;
        s.read_interval("rotation_degrees", r.rotation_degrees);
        s.read_interval("affine_degrees", r.affine_degrees);
        augment::Interval translate{r.translate_x, r.translate_y};
        s.read_interval("translate", translate);
        r.translate_x = translate.lo;
        r.translate_y = translate.hi;
        s.read_interval("scale", r.affine_scale);
        s.read_interval("shear", r.shear_degrees);
        s.read("noise_mean", r.noise_mean);
        s.read("noise_std", r.noise_std);
        s.read_interval("crop_scale", r.crop_scale);
        s.read_interval("crop_ratio", r.crop_ratio);
        s.done();
    }
    if (const json* d = root.get("dataset")) {
        Section s(*d, "dataset");
        s.read("path", c.dataset.path);
        s.read("test_path", c.dataset.test_path);
        if (const json* y = s.get("synth")) {
            Section ss(*y, "dataset.synth");
            ss.read("classes", c.dataset.synth.classes);
            ss.read("n_per_class", c.dataset.synth.n_per_class);
            ss.read("test_n_per_class", c.dataset.synth.test_n_per_class);
            ss.read("image_size", c.dataset.synth.image_size);
            ss.read("jitter", c.dataset.synth.jitter);
            ss.read("seed", c.dataset.synth.seed);
            ss.done();
        }
        s.done();
    }
    root.read("output_dir", c.output_dir);
    root.done();
    c.train.validate();
    c.augment.chain();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(bool(in), ErrorKind::io, "cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorKind::invalid_config, "config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    const auto& t = train;
    const auto& l = t.loss;
    const auto& r = augment.ranges;
    return {
        {"train",
         {{"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"learning_rate", t.learning_rate},
          {"weight_decay", t.weight_decay},
          {"lr_min", t.lr_min},
          {"seed", t.seed},
          {"hidden", t.hidden},
          {"out_dim", t.out_dim ? json(*t.out_dim) : json(nullptr)},
          {"probe_epochs", t.probe_epochs},
          {"probe_weight_decay", t.probe_weight_decay},
          {"probe_hidden", t.probe_hidden},
          {"collapse_patience", t.collapse_patience}}},
        {"loss",
         {{"kind", losses::to_string(l.kind)},
          {"s", l.s},
          {"alpha", l.alpha},
          {"beta", l.beta},
          {"temperature", l.temperature},
          {"hsic_bandwidth", l.hsic_bandwidth.median_heuristic ? json("median") : json(l.hsic_bandwidth.fixed)}}},
        {"ot",
         {{"order", l.ot.order},
          {"num_projections", l.ot.num_projections},
          {"shuffle_both", l.ot.shuffle_both},
          {"epsilon_guard", l.ot.epsilon_guard},
          {"num_shuffles", l.ot.num_shuffles}}},
        {"augment",
         {{"name", augment.name},
          {"rotation_degrees", interval(r.rotation_degrees)},
          {"affine_degrees", interval(r.affine_degrees)},
          {"translate", json::array({r.translate_x, r.translate_y})},
          {"scale", interval(r.affine_scale)},
          {"shear", interval(r.shear_degrees)},
          {"noise_mean", r.noise_mean},
          {"noise_std", r.noise_std},
          {"crop_scale", interval(r.crop_scale)},
          {"crop_ratio", interval(r.crop_ratio)}}},
        {"dataset",
         {{"path", dataset.path},
          {"test_path", dataset.test_path},
          {"synth",
           {{"classes", dataset.synth.classes},
            {"n_per_class", dataset.synth.n_per_class},
            {"test_n_per_class", dataset.synth.test_n_per_class},
            {"image_size", dataset.synth.image_size},
            {"jitter", dataset.synth.jitter},
            {"seed", dataset.synth.seed}}}}},
        {"output_dir", output_dir},
    };
}

}  // namespace ptai::cli
