#include "moenas/config.hpp"

#include <charconv>
#include <map>
#include <set>
#include <variant>

#include "moenas/error.hpp"
#include "moenas/io.hpp"

namespace moenas {

namespace {

struct Value {
    enum class Kind { Integer, Float, Bool, String, Array } kind = Kind::Integer;
    std::string text; // the literal as written, for numbers
    bool boolean = false;
    std::string string;
    std::vector<std::string> array;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

// Parses a double-quoted string starting at s[pos]; advances pos past the closing quote.
std::string parse_string(std::string_view s, std::size_t& pos, const std::string& key) {
    std::string out;
    ++pos;
    while (pos < s.size() && s[pos] != '"') {
        if (s[pos] == '\\') {
            if (pos + 1 >= s.size()) {
                break;
            }
            const char e = s[pos + 1];
            switch (e) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            default: throw ConfigError(key, std::string("unsupported escape \\") + e);
            }
            pos += 2;
        } else {
            out += s[pos++];
        }
    }
    if (pos >= s.size()) {
        throw ConfigError(key, "unterminated string");
    }
    ++pos;
    return out;
}

// Removes a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (in_string && c == '\\') {
            ++k;
        } else if (c == '"') {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return line.substr(0, k);
        }
    }
    return line;
}

Value parse_value(std::string_view raw, const std::string& key) {
    Value v;
    const auto s = trim(raw);
    if (s.empty()) {
        throw ConfigError(key, "missing value");
    }
    if (s.front() == '"') {
        std::size_t pos = 0;
        v.kind = Value::Kind::String;
        v.string = parse_string(s, pos, key);
        if (!trim(s.substr(pos)).empty()) {
            throw ConfigError(key, "unexpected text after string");
        }
        return v;
    }
    if (s.front() == '[') {
        v.kind = Value::Kind::Array;
        std::size_t pos = 1;
        bool expect_item = true;
        while (true) {
            while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) {
                ++pos;
            }
            if (pos >= s.size()) {
                throw ConfigError(key, "unterminated array");
            }
            if (s[pos] == ']') {
                ++pos;
                break;
            }
            if (s[pos] == '"' && expect_item) {
                v.array.push_back(parse_string(s, pos, key));
                expect_item = false;
            } else if (s[pos] == ',' && !expect_item) {
                ++pos;
                expect_item = true;
            } else {
                throw ConfigError(key, "arrays may only hold strings");
            }
        }
        if (!trim(s.substr(pos)).empty()) {
            throw ConfigError(key, "unexpected text after array");
        }
        return v;
    }
    if (s == "true" || s == "false") {
        v.kind = Value::Kind::Bool;
        v.boolean = s == "true";
        return v;
    }
    v.text = std::string(s);
    const bool is_float = s.find_first_of(".eE") != std::string_view::npos || s == "inf" || s == "nan";
    v.kind = is_float ? Value::Kind::Float : Value::Kind::Integer;
    return v;
}

using Table = std::map<std::string, std::map<std::string, Value>>;

class Reader {
public:
    Reader(const Table& t, std::string section) : section_(std::move(section)) {
        if (const auto it = t.find(section_); it != t.end()) {
            values_ = &it->second;
        }
    }

    [[nodiscard]] std::string key(const std::string& name) const { return section_ + "." + name; }

    const Value* find(const std::string& name) {
        used_.insert(name);
        if (values_ == nullptr) {
            return nullptr;
        }
        const auto it = values_->find(name);
        return it == values_->end() ? nullptr : &it->second;
    }

    void read(const std::string& name, int& out) {
        if (const auto* v = find(name)) {
            if (v->kind != Value::Kind::Integer) {
                throw ConfigError(key(name), "expected an integer");
            }
            int x = 0;
            const auto [p, ec] = std::from_chars(v->text.data(), v->text.data() + v->text.size(), x);
            if (ec != std::errc{} || p != v->text.data() + v->text.size()) {
                throw ConfigError(key(name), "invalid integer '" + v->text + "'");
            }
            out = x;
        }
    }

    void read(const std::string& name, std::uint64_t& out) {
        if (const auto* v = find(name)) {
            if (v->kind != Value::Kind::Integer) {
                throw ConfigError(key(name), "expected a non-negative integer");
            }
            std::uint64_t x = 0;
            const auto [p, ec] = std::from_chars(v->text.data(), v->text.data() + v->text.size(), x);
            if (ec != std::errc{} || p != v->text.data() + v->text.size()) {
                throw ConfigError(key(name), "invalid non-negative integer '" + v->text + "'");
            }
            out = x;
        }
    }

    void read(const std::string& name, double& out) {
        if (const auto* v = find(name)) {
            if (v->kind != Value::Kind::Integer && v->kind != Value::Kind::Float) {
                throw ConfigError(key(name), "expected a number");
            }
            try {
                out = parse_double(v->text);
            } catch (const Error&) {
                throw ConfigError(key(name), "invalid number '" + v->text + "'");
            }
        }
    }

    void read(const std::string& name, std::string& out) {
        if (const auto* v = find(name)) {
            if (v->kind != Value::Kind::String) {
                throw ConfigError(key(name), "expected a quoted string");
            }
            out = v->string;
        }
    }

    void read(const std::string& name, std::vector<std::string>& out) {
        if (const auto* v = find(name)) {
            if (v->kind != Value::Kind::Array) {
                throw ConfigError(key(name), "expected an array of strings");
            }
            out = v->array;
        }
    }

    // Rejects keys in the section that nobody asked for.
    void finish() const {
        if (values_ == nullptr) {
            return;
        }
        for (const auto& [name, v] : *values_) {
            if (!used_.contains(name)) {
                throw ConfigError(key(name), "unknown key");
            }
        }
    }

private:
    std::string section_;
    const std::map<std::string, Value>* values_ = nullptr;
    std::set<std::string> used_;
};

Table tokenize(std::string_view text) {
    Table table;
    std::string section;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const auto line = trim(strip_comment(text.substr(pos, end - pos)));
        pos = end + 1;
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(where, "malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const std::set<std::string> known{"engine", "objective", "forest", "evaluator"};
            if (!known.contains(section)) {
                throw ConfigError(section, "unknown section");
            }
            table[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(where, "expected 'key = value'");
        }
        const std::string name(trim(line.substr(0, eq)));
        if (section.empty()) {
            throw ConfigError(name, "key outside of a section");
        }
        const std::string key = section + "." + name;
        if (name.empty()) {
            throw ConfigError(where, "empty key");
        }
        auto value = parse_value(line.substr(eq + 1), key);
        if (!table[section].emplace(name, std::move(value)).second) {
            throw ConfigError(key, "duplicate key");
        }
    }
    return table;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out + '"';
}

std::string number(double v) {
    auto s = format_double(v);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

} // namespace

EngineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    const Table table = tokenize(text);
    EngineConfig cfg;

    Reader engine(table, "engine");
    engine.read("population", cfg.population);
    engine.read("neighborhood", cfg.neighborhood);
    engine.read("generations", cfg.generations);
    engine.read("learning_generations", cfg.learning_generations);
    engine.read("epsilon", cfg.epsilon);
    engine.read("epsilon_subproblem", cfg.epsilon_subproblem);
    engine.read("theta_pbi", cfg.theta_pbi);
    engine.read("gamma", cfg.gamma);
    engine.read("mutation_rate", cfg.mutation_rate);
    engine.read("max_attempts", cfg.max_attempts);
    engine.read("seed", cfg.seed);
    std::string variant(variant_name(cfg.variant));
    engine.read("variant", variant);
    try {
        cfg.variant = parse_variant(variant);
    } catch (const Error& ex) {
        throw ConfigError("engine.variant", ex.what());
    }
    engine.finish();

    Reader objective(table, "objective");
    objective.read("alpha", cfg.objective.alpha);
    objective.read("beta", cfg.objective.beta);
    objective.read("num_classes", cfg.objective.num_classes);
    objective.read("total_epochs", cfg.objective.total_epochs);
    objective.finish();

    Reader forest(table, "forest");
    forest.read("num_trees", cfg.forest.num_trees);
    forest.read("min_samples_split", cfg.forest.min_samples_split);
    forest.read("mtry", cfg.forest.mtry);
    forest.finish();

    Reader evaluator(table, "evaluator");
    std::string kind = "synthetic";
    evaluator.read("kind", kind);
    if (kind == "synthetic") {
        SyntheticSpec spec;
        evaluator.read("noise_sigma", spec.noise_sigma);
        evaluator.read("noise_seed", spec.noise_seed);
        if (!(spec.noise_sigma >= 0.0)) {
            throw ConfigError("evaluator.noise_sigma", "must be >= 0");
        }
        cfg.evaluator = spec;
    } else if (kind == "tabular") {
        std::string path;
        evaluator.read("path", path);
        if (path.empty()) {
            throw ConfigError("evaluator.path", "required for the tabular evaluator");
        }
        std::filesystem::path p(path);
        if (p.is_relative() && !base_dir.empty()) {
            p = base_dir / p;
        }
        cfg.evaluator = TabularSpec{p};
    } else if (kind == "external") {
        ExternalSpec spec;
        evaluator.read("command", spec.command);
        evaluator.read("args", spec.args);
        evaluator.read("timeout_seconds", spec.timeout_seconds);
        if (spec.command.empty()) {
            throw ConfigError("evaluator.command", "required for the external evaluator");
        }
        if (!(spec.timeout_seconds > 0.0)) {
            throw ConfigError("evaluator.timeout_seconds", "must be > 0");
        }
        cfg.evaluator = spec;
    } else {
        throw ConfigError("evaluator.kind", "unknown evaluator kind '" + kind + "'");
    }
    evaluator.finish();

    validate(cfg);
    return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& ex) {
        throw ConfigError("", ex.what());
    }
    return parse_config(text, path.parent_path());
}

std::string format_config(const EngineConfig& cfg) {
    std::string out;
    out += "[engine]\n";
    out += "population = " + std::to_string(cfg.population) + "\n";
    out += "neighborhood = " + std::to_string(cfg.neighborhood) + "\n";
    out += "generations = " + std::to_string(cfg.generations) + "\n";
    out += "learning_generations = " + std::to_string(cfg.learning_generations) + "\n";
    out += "epsilon = " + number(cfg.epsilon) + "\n";
    out += "epsilon_subproblem = " + number(cfg.epsilon_subproblem) + "\n";
    out += "theta_pbi = " + number(cfg.theta_pbi) + "\n";
    out += "gamma = " + number(cfg.gamma) + "\n";
    out += "mutation_rate = " + number(cfg.mutation_rate) + "\n";
    out += "max_attempts = " + std::to_string(cfg.max_attempts) + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "variant = " + quote(variant_name(cfg.variant)) + "\n";
    out += "\n[objective]\n";
    out += "alpha = " + number(cfg.objective.alpha) + "\n";
    out += "beta = " + number(cfg.objective.beta) + "\n";
    out += "num_classes = " + std::to_string(cfg.objective.num_classes) + "\n";
    out += "total_epochs = " + std::to_string(cfg.objective.total_epochs) + "\n";
    out += "\n[forest]\n";
    out += "num_trees = " + std::to_string(cfg.forest.num_trees) + "\n";
    out += "min_samples_split = " + std::to_string(cfg.forest.min_samples_split) + "\n";
    out += "mtry = " + std::to_string(cfg.forest.mtry) + "\n";
    out += "\n[evaluator]\n";
    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, SyntheticSpec>) {
                out += "kind = \"synthetic\"\n";
                out += "noise_sigma = " + number(spec.noise_sigma) + "\n";
                out += "noise_seed = " + std::to_string(spec.noise_seed) + "\n";
            } else if constexpr (std::is_same_v<T, TabularSpec>) {
                out += "kind = \"tabular\"\n";
                out += "path = " + quote(spec.path.string()) + "\n";
            } else {
                out += "kind = \"external\"\n";
                out += "command = " + quote(spec.command) + "\n";
                out += "args = [";
                for (std::size_t k = 0; k < spec.args.size(); ++k) {
                    out += (k > 0 ? ", " : "") + quote(spec.args[k]);
                }
                out += "]\n";
                out += "timeout_seconds = " + number(spec.timeout_seconds) + "\n";
            }
        },
        cfg.evaluator);
    return out;
}

} // namespace moenas
