// SPDX-License-Identifier: Apache-2.0
#include "erddci/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace erddci::harness {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const KeyValueFile::Entry& e, const std::string& key) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw ConfigFileError(e.line, key + ": expected a number, got '" + e.value + "'");
    return v;
}

long long to_integer(const KeyValueFile::Entry& e, const std::string& key) {
    long long v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw ConfigFileError(e.line, key + ": expected an integer, got '" + e.value + "'");
    return v;
}

class Reader {
public:
    explicit Reader(const KeyValueFile& kv) : kv_(kv) {}

    template <typename Fn>
    void with(const std::string& section, const std::string& key, Fn&& fn) const {
        if (const auto* e = kv_.find(section, key)) fn(*e, section + "." + key);
    }

    void real(const std::string& s, const std::string& k, double& out) const {
        with(s, k, [&](const auto& e, const auto& name) { out = to_double(e, name); });
    }

    template <typename Int>
    void integer(const std::string& s, const std::string& k, Int& out, long long lo) const {
        with(s, k, [&](const auto& e, const auto& name) {
            const long long v = to_integer(e, name);
            if (v < lo) throw ConfigFileError(e.line, name + " must be >= " + std::to_string(lo));
            out = static_cast<Int>(v);
        });
    }

    void reals(const std::string& s, const std::string& k, std::vector<double>& out) const {
        with(s, k, [&](const auto& e, const auto& name) {
            out.clear();
            for (const auto& item : split_list(e.value)) out.push_back(to_double({item, e.line}, name));
            if (out.empty()) throw ConfigFileError(e.line, name + " must list at least one value");
        });
    }

    void integers(const std::string& s, const std::string& k, std::vector<int>& out) const {
        with(s, k, [&](const auto& e, const auto& name) {
            out.clear();
            for (const auto& item : split_list(e.value)) {
                const long long v = to_integer({item, e.line}, name);
                if (v < 1) throw ConfigFileError(e.line, name + " entries must be positive");
                out.push_back(static_cast<int>(v));
            }
            if (out.empty()) throw ConfigFileError(e.line, name + " must list at least one value");
        });
    }

private:
    const KeyValueFile& kv_;
};

int line_of(const KeyValueFile& kv, const std::string& section, const std::string& key) {
    const auto* e = kv.find(section, key);
    return e ? e->line : 0;
}

const std::map<std::string, std::vector<std::string>> kAllowedKeys = {
    {"schedule", {"T_train", "beta_start", "beta_end"}},
    {"plan", {"n_steps", "sweep"}},
    {"predictor",
     {"kind", "value", "condition_gain", "fit_samples", "hidden", "epochs", "steps_per_epoch", "batch_size", "lr",
      "condition_dropout", "lr_schedule", "init_seed", "checkpoint"}},
    {"dcs", {"omega", "omega_sweep", "eta", "t_end", "m", "n", "strong_m", "strong_n", "r"}},
    {"data", {"kind", "seed", "count", "side", "dim", "components", "spread", "variance"}},
    {"edit", {"types", "target", "mix", "style_scale", "eta_sweep", "ji_condition"}},
    {"traj", {"item", "dit_start", "dit_omega"}},
    {"out", {"directory"}},
};

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigFileError(line_no, "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ConfigFileError(line_no, "empty section name");
            kv.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigFileError(line_no, "expected 'key = value'");
        if (section.empty()) throw ConfigFileError(line_no, "key outside of any [section]");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigFileError(line_no, "empty key");
        auto& entries = kv.sections_[section];
        if (entries.count(key)) throw ConfigFileError(line_no, "duplicate key '" + key + "'");
        entries[key] = Entry{value, line_no};
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigFileError(0, "cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const KeyValueFile::Entry* KeyValueFile::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void KeyValueFile::reject_unknown(const std::map<std::string, std::vector<std::string>>& allowed) const {
    for (const auto& [section, entries] : sections_) {
        const auto a = allowed.find(section);
        for (const auto& [key, entry] : entries) {
            const bool ok = a != allowed.end() &&
                            std::find(a->second.begin(), a->second.end(), key) != a->second.end();
            if (!ok) throw ConfigFileError(entry.line, "unknown key '" + key + "' in [" + section + "]");
        }
        if (a == allowed.end() && entries.empty()) throw ConfigFileError(0, "unknown section [" + section + "]");
    }
}

const char* to_string(EditType type) noexcept {
    switch (type) {
        case EditType::t1: return "T1";
        case EditType::t2: return "T2";
        case EditType::t3: return "T3";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    const KeyValueFile kv = KeyValueFile::parse(text);
    kv.reject_unknown(kAllowedKeys);
    const Reader r(kv);
    ExperimentConfig cfg;
    cfg.base_dir = base_dir;

    r.integer("schedule", "T_train", cfg.schedule.train_steps, 1);
    r.real("schedule", "beta_start", cfg.schedule.beta_start);
    r.real("schedule", "beta_end", cfg.schedule.beta_end);
    if (!(cfg.schedule.beta_start >= 0 && cfg.schedule.beta_start <= cfg.schedule.beta_end &&
          cfg.schedule.beta_end < 1)) {
        const auto* e = kv.find("schedule", "beta_end");
        throw ConfigFileError(e ? e->line : 0, "betas must satisfy 0 <= beta_start <= beta_end < 1");
    }

    r.integer("plan", "n_steps", cfg.plan.n_steps, 1);
    r.integers("plan", "sweep", cfg.plan.sweep);
    if (cfg.plan.n_steps > cfg.schedule.train_steps) {
        throw ConfigFileError(line_of(kv, "plan", "n_steps"), "plan.n_steps exceeds T_train");
    }
    for (int n : cfg.plan.sweep) {
        if (n > cfg.schedule.train_steps) throw ConfigFileError(line_of(kv, "plan", "sweep"), "plan.sweep exceeds T_train");
    }

    r.with("predictor", "kind", [&](const auto& e, const auto&) {
        if (e.value == "constant") cfg.predictor.kind = PredictorKind::constant;
        else if (e.value == "gmm") cfg.predictor.kind = PredictorKind::gmm;
        else if (e.value == "mlp") cfg.predictor.kind = PredictorKind::mlp;
        else throw ConfigFileError(e.line, "predictor.kind must be constant, gmm, or mlp");
    });
    r.real("predictor", "value", cfg.predictor.constant_value);
    r.real("predictor", "condition_gain", cfg.predictor.condition_gain);
    r.integer("predictor", "fit_samples", cfg.predictor.fit_samples, 1);
    r.integer("predictor", "hidden", cfg.predictor.hidden, 1);
    r.integer("predictor", "epochs", cfg.predictor.epochs, 0);
    r.integer("predictor", "steps_per_epoch", cfg.predictor.steps_per_epoch, 1);
    r.integer("predictor", "batch_size", cfg.predictor.batch_size, 1);
    r.real("predictor", "lr", cfg.predictor.learning_rate);
    r.real("predictor", "condition_dropout", cfg.predictor.condition_dropout);
    r.with("predictor", "lr_schedule", [&](const auto& e, const auto&) {
        if (e.value == "cosine") cfg.predictor.cosine_decay = true;
        else if (e.value == "constant") cfg.predictor.cosine_decay = false;
        else throw ConfigFileError(e.line, "predictor.lr_schedule must be cosine or constant");
    });
    r.integer("predictor", "init_seed", cfg.predictor.init_seed, 0);
    r.with("predictor", "checkpoint", [&](const auto& e, const auto&) { cfg.predictor.checkpoint = base_dir / e.value; });
    if (const auto* e = kv.find("predictor", "lr"); e && !(cfg.predictor.learning_rate > 0)) {
        throw ConfigFileError(e->line, "predictor.lr must be positive");
    }

    r.real("dcs", "omega", cfg.dcs.omega);
    r.reals("dcs", "omega_sweep", cfg.dcs.omega_sweep);
    r.real("dcs", "eta", cfg.dcs.eta);
    r.integer("dcs", "t_end", cfg.dcs.t_end, 0);
    r.real("dcs", "m", cfg.dcs.m);
    r.real("dcs", "n", cfg.dcs.n);
    r.real("dcs", "strong_m", cfg.dcs.strong_m);
    r.real("dcs", "strong_n", cfg.dcs.strong_n);
    r.integer("dcs", "r", cfg.dcs.r, 1);
    if (const auto* e = kv.find("dcs", "omega"); e && !(cfg.dcs.omega >= 1)) {
        throw ConfigFileError(e->line, "dcs.omega must be >= 1");
    }
    for (double w : cfg.dcs.omega_sweep) {
        if (!(w >= 0)) throw ConfigFileError(line_of(kv, "dcs", "omega_sweep"), "guidance scales must be >= 0");
    }
    if (const auto* e = kv.find("dcs", "eta"); e && !(cfg.dcs.eta >= 0 && cfg.dcs.eta <= 1)) {
        throw ConfigFileError(e->line, "dcs.eta must lie in [0, 1]");
    }

    r.with("data", "kind", [&](const auto& e, const auto&) {
        if (e.value == "gmm-samples") cfg.data.kind = DataKind::gmm_samples;
        else if (e.value == "shapes-32") cfg.data.kind = DataKind::shapes32;
        else throw ConfigFileError(e.line, "data.kind must be gmm-samples or shapes-32");
    });
    r.integer("data", "seed", cfg.data.seed, 0);
    r.integer("data", "count", cfg.data.count, 1);
    r.integer("data", "side", cfg.data.side, 8);
    r.integer("data", "dim", cfg.data.dim, 1);
    r.integer("data", "components", cfg.data.components, 1);
    r.real("data", "spread", cfg.data.spread);
    r.real("data", "variance", cfg.data.variance);
    if (const auto* e = kv.find("data", "variance"); e && !(cfg.data.variance >= 0)) {
        throw ConfigFileError(e->line, "data.variance must be >= 0");
    }

    r.with("edit", "types", [&](const auto& e, const auto&) {
        cfg.edit.types.clear();
        for (const auto& item : split_list(e.value)) {
            if (item == "T1") cfg.edit.types.push_back(EditType::t1);
            else if (item == "T2") cfg.edit.types.push_back(EditType::t2);
            else if (item == "T3") cfg.edit.types.push_back(EditType::t3);
            else throw ConfigFileError(e.line, "edit.types entries must be T1, T2, or T3");
        }
        if (cfg.edit.types.empty()) throw ConfigFileError(e.line, "edit.types must not be empty");
    });
    r.with("edit", "target", [&](const auto& e, const auto& name) {
        const long long v = to_integer(e, name);
        if (v < 0) throw ConfigFileError(e.line, "edit.target must be >= 0");
        cfg.edit.target = static_cast<std::size_t>(v);
    });
    r.real("edit", "mix", cfg.edit.mix);
    r.real("edit", "style_scale", cfg.edit.style_scale);
    r.reals("edit", "eta_sweep", cfg.edit.eta_sweep);
    for (double eta : cfg.edit.eta_sweep) {
        if (!(eta >= 0 && eta <= 1)) throw ConfigFileError(line_of(kv, "edit", "eta_sweep"), "eta values must lie in [0, 1]");
    }

    r.with("edit", "ji_condition", [&](const auto& e, const auto&) {
        if (e.value == "source") cfg.edit.ji_uses_target = false;
        else if (e.value == "target") cfg.edit.ji_uses_target = true;
        else throw ConfigFileError(e.line, "edit.ji_condition must be source or target");
    });

    r.integer("traj", "item", cfg.traj.item, 0);
    r.with("traj", "dit_start", [&](const auto& e, const auto&) {
        if (e.value == "ddim") cfg.traj.dit_from_aux = false;
        else if (e.value == "aux") cfg.traj.dit_from_aux = true;
        else throw ConfigFileError(e.line, "traj.dit_start must be ddim or aux");
    });
    r.with("traj", "dit_omega", [&](const auto& e, const auto& name) { cfg.traj.dit_omega = to_double(e, name); });

    r.with("out", "directory", [&](const auto& e, const auto&) { cfg.out_dir = base_dir / e.value; });
    if (!kv.find("out", "directory")) cfg.out_dir = base_dir / "out";
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigFileError(0, "cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_config(buf.str(), base);
}

}  // namespace erddci::harness
