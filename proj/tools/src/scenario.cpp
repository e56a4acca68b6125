#include "stopt_cli/scenario.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stopt::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& v, int line) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("scenario line " + std::to_string(line) +
                                 ": not a number: '" + v + "'");
    }
    if (pos != v.size())
        throw std::runtime_error("scenario line " + std::to_string(line) +
                                 ": trailing characters after number: '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("scenario line " + std::to_string(line) + ": not a boolean: '" + v +
                             "'");
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(tok, line));
    return out;
}

}  // namespace

bool is_model_key(const std::string& key) {
    static const char* keys[] = {"mu", "sigma", "rho", "alpha", "beta", "cap_k",
                                 "cost_slope", "cost_intercept", "lambda1", "lambda2"};
    for (const char* k : keys)
        if (key == k) return true;
    return false;
}

double* model_field(ModelParams& p, const std::string& key) {
    if (key == "mu") return &p.market.mu;
    if (key == "sigma") return &p.market.sigma;
    if (key == "rho") return &p.market.rho;
    if (key == "alpha") return &p.profit.alpha;
    if (key == "beta") return &p.profit.beta;
    if (key == "cap_k") return &p.profit.cap_k;
    if (key == "cost_slope") return &p.cost.cost_slope;
    if (key == "cost_intercept") return &p.cost.cost_intercept;
    if (key == "lambda1") return &p.hazards.lambda1;
    if (key == "lambda2") return &p.hazards.lambda2;
    return nullptr;
}

ScenarioFile parse_scenario(const std::string& text) {
    ScenarioFile sc;
    sc.mc.config = McConfig{};

    // sweep grid pieces that may be spread over several keys
    std::optional<double> sweep_min, sweep_max;
    std::optional<long> sweep_count;
    bool sweep_log = false;

    enum class Section { top, sweep, mc };
    Section section = Section::top;

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s == "[sweep]") {
                section = Section::sweep;
                if (!sc.sweep) sc.sweep = SweepSpec{};
            } else if (s == "[mc]") {
                section = Section::mc;
            } else {
                throw std::runtime_error("scenario line " + std::to_string(line) +
                                         ": unknown section " + s);
            }
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("scenario line " + std::to_string(line) +
                                     ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));

        switch (section) {
            case Section::top: {
                double* field = model_field(sc.params, key);
                if (!field)
                    throw std::runtime_error("scenario line " + std::to_string(line) +
                                             ": unknown parameter '" + key + "'");
                *field = parse_double(value, line);
                break;
            }
            case Section::sweep: {
                if (key == "parameter") sc.sweep->parameter = value;
                else if (key == "values") sc.sweep->values = parse_list(value, line);
                else if (key == "min") sweep_min = parse_double(value, line);
                else if (key == "max") sweep_max = parse_double(value, line);
                else if (key == "count") sweep_count = static_cast<long>(parse_double(value, line));
                else if (key == "spacing") sweep_log = (value == "log");
                else
                    throw std::runtime_error("scenario line " + std::to_string(line) +
                                             ": unknown sweep key '" + key + "'");
                break;
            }
            case Section::mc: {
                auto& mc = sc.mc.config;
                if (key == "n_paths") mc.n_paths = static_cast<long>(parse_double(value, line));
                else if (key == "dt") mc.dt = parse_double(value, line);
                else if (key == "horizon") mc.horizon = parse_double(value, line);
                else if (key == "seed")
                    mc.seed = static_cast<std::uint64_t>(parse_double(value, line));
                else if (key == "antithetic") mc.antithetic = parse_bool(value, line);
                else if (key == "threads") mc.threads = static_cast<int>(parse_double(value, line));
                else if (key == "x0") sc.mc.x0 = parse_list(value, line);
                else
                    throw std::runtime_error("scenario line " + std::to_string(line) +
                                             ": unknown mc key '" + key + "'");
                break;
            }
        }
    }

    if (sc.sweep && sc.sweep->values.empty() && sweep_min && sweep_max && sweep_count) {
        const long n = *sweep_count;
        for (long i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            sc.sweep->values.push_back(sweep_log
                                           ? *sweep_min * std::pow(*sweep_max / *sweep_min, t)
                                           : *sweep_min + (*sweep_max - *sweep_min) * t);
        }
    }
    if (sc.sweep && sc.sweep->parameter.empty())
        throw std::runtime_error("scenario: [sweep] section without a parameter name");
    if (sc.sweep && !is_model_key(sc.sweep->parameter))
        throw std::runtime_error("scenario: sweep parameter '" + sc.sweep->parameter +
                                 "' does not name a model field");
    return sc;
}

ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

void apply_override(ScenarioFile& sc, const std::string& key_value) {
    const std::size_t eq = key_value.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("--set expects key=value, got '" + key_value + "'");
    const std::string key = trim(key_value.substr(0, eq));
    const std::string value = trim(key_value.substr(eq + 1));

    if (double* field = model_field(sc.params, key)) {
        *field = parse_double(value, 0);
        return;
    }
    if (key.rfind("mc.", 0) == 0) {
        const std::string sub = key.substr(3);
        auto& mc = sc.mc.config;
        if (sub == "n_paths") mc.n_paths = static_cast<long>(parse_double(value, 0));
        else if (sub == "dt") mc.dt = parse_double(value, 0);
        else if (sub == "horizon") mc.horizon = parse_double(value, 0);
        else if (sub == "seed") mc.seed = static_cast<std::uint64_t>(parse_double(value, 0));
        else if (sub == "antithetic") mc.antithetic = parse_bool(value, 0);
        else if (sub == "threads") mc.threads = static_cast<int>(parse_double(value, 0));
        else if (sub == "x0") sc.mc.x0 = parse_list(value, 0);
        else throw std::runtime_error("--set: unknown mc key '" + sub + "'");
        return;
    }
    if (key.rfind("sweep.", 0) == 0) {
        const std::string sub = key.substr(6);
        if (!sc.sweep) sc.sweep = SweepSpec{};
        if (sub == "parameter") sc.sweep->parameter = value;
        else if (sub == "values") sc.sweep->values = parse_list(value, 0);
        else throw std::runtime_error("--set: unknown sweep key '" + sub + "'");
        return;
    }
    if (key.rfind("verify.", 0) == 0) {
        const std::string sub = key.substr(7);
        if (sub == "cancel_at") sc.override_cancel = parse_double(value, 0);
        else if (sub == "enter_at") sc.override_enter = parse_double(value, 0);
        else if (sub == "abandon_pre_at") sc.override_abandon_pre = parse_double(value, 0);
        else if (sub == "abandon_post_at") sc.override_abandon_post = parse_double(value, 0);
        else throw std::runtime_error("--set: unknown verify key '" + sub + "'");
        return;
    }
    throw std::runtime_error("--set: unknown key '" + key + "'");
}

}  // namespace stopt::cli
