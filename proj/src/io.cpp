#include "permstat/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace permstat::io {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    if (delim == ' ') {
        while (ss >> field) out.push_back(field);
        return out;
    }
    while (std::getline(ss, field, delim)) {
        // Trim surrounding whitespace.
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    return out;
}

char detect_delimiter(const std::string& line) {
    if (line.find('\t') != std::string::npos) return '\t';
    if (line.find(',') != std::string::npos) return ',';
    if (line.find(';') != std::string::npos) return ';';
    return ' ';
}

bool parse_double(const std::string& field, double& value) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && !field.empty();
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_raw(const TableSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + spec.path);
    RawTable table;
    std::string line;
    char delim = spec.delimiter;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && delim == '\0') delim = detect_delimiter(line);
        auto fields = split_line(line, delim);
        if (first && spec.header) {
            table.header = std::move(fields);
        } else {
            table.rows.push_back(std::move(fields));
        }
        first = false;
    }
    if (table.rows.empty()) throw Error(ErrorCode::EmptyTable, spec.path + " holds no data rows");
    return table;
}

bool parse_index(const std::string& name, std::size_t& idx) {
    if (name.empty()) return false;
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), value);
    if (ec != std::errc() || ptr != name.data() + name.size()) return false;
    idx = value;
    return true;
}

std::size_t column_index(const RawTable& table, const std::string& name, const char* what) {
    if (!table.header.empty()) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it != table.header.end()) {
            return static_cast<std::size_t>(it - table.header.begin());
        }
    }
    // Fall back to a numeric index for headerless files.
    std::size_t idx = 0;
    if (parse_index(name, idx)) return idx;
    throw Error(ErrorCode::ParseError, std::string(what) + " column not found: " + name);
}

}  // namespace

WideTable load_wide(const TableSpec& spec) {
    const RawTable raw = read_raw(spec);
    const std::size_t n_cols = raw.rows.front().size();
    if (n_cols == 0) throw Error(ErrorCode::EmptyTable, spec.path + " holds no columns");
    WideTable out;
    out.column_names.reserve(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
        out.column_names.push_back(c < raw.header.size() ? raw.header[c]
                                                         : "v" + std::to_string(c));
    }
    out.data = DataMatrix(raw.rows.size(), n_cols);
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        if (raw.rows[r].size() != n_cols) {
            std::ostringstream msg;
            msg << spec.path << ": row " << r << " has " << raw.rows[r].size()
                << " fields, expected " << n_cols;
            throw Error(ErrorCode::ParseError, msg.str());
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            double value = 0.0;
            if (!parse_double(raw.rows[r][c], value)) {
                std::ostringstream msg;
                msg << spec.path << ": unparseable number at row " << r << ", column " << c;
                throw Error(ErrorCode::ParseError, msg.str());
            }
            if (!std::isfinite(value)) {
                std::ostringstream msg;
                msg << spec.path << ": non-finite value at row " << r << ", column " << c;
                throw Error(ErrorCode::NonFiniteValue, msg.str());
            }
            out.data.at(r, c) = value;
        }
    }
    return out;
}

namespace {

std::vector<int> encode_labels(const RawTable& raw, std::size_t col,
                               std::vector<std::string>& levels, const std::string& path) {
    std::map<std::string, int> codes;
    for (const auto& row : raw.rows) {
        if (col >= row.size()) {
            throw Error(ErrorCode::ParseError, path + ": short row while reading labels");
        }
        codes.emplace(row[col], 0);
    }
    levels.clear();
    int next = 0;
    for (auto& [label, code] : codes) {
        code = next++;
        levels.push_back(label);
    }
    std::vector<int> out;
    out.reserve(raw.rows.size());
    for (const auto& row : raw.rows) out.push_back(codes[row[col]]);
    return out;
}

}  // namespace

LongTable load_long(const TableSpec& spec) {
    if (spec.value_column.empty() || spec.group_columns.empty()) {
        throw Error(ErrorCode::BadArgument, "long layout requires value and group columns");
    }
    const RawTable raw = read_raw(spec);
    const std::size_t vcol = column_index(raw, spec.value_column, "value");
    LongTable out;
    out.values.reserve(raw.rows.size());
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        if (vcol >= raw.rows[r].size()) {
            std::ostringstream msg;
            msg << spec.path << ": row " << r << " lacks the value column";
            throw Error(ErrorCode::ParseError, msg.str());
        }
        double value = 0.0;
        if (!parse_double(raw.rows[r][vcol], value)) {
            std::ostringstream msg;
            msg << spec.path << ": unparseable number at row " << r << ", column " << vcol;
            throw Error(ErrorCode::ParseError, msg.str());
        }
        if (!std::isfinite(value)) {
            std::ostringstream msg;
            msg << spec.path << ": non-finite value at row " << r << ", column " << vcol;
            throw Error(ErrorCode::NonFiniteValue, msg.str());
        }
        out.values.push_back(value);
    }
    out.group_a = encode_labels(raw, column_index(raw, spec.group_columns[0], "group"),
                                out.levels_a, spec.path);
    if (spec.group_columns.size() > 1) {
        out.group_b = encode_labels(raw, column_index(raw, spec.group_columns[1], "group"),
                                    out.levels_b, spec.path);
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

// NaN and +-inf have no JSON number representation; they serialize as null
// (one-tailed CI bounds are the usual source).
nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

nlohmann::json config_to_json(const TestConfig& cfg) {
    return {
        {"n_perm", cfg.n_perm},
        {"seed", cfg.seed},
        {"tail", tail_name(cfg.tail)},
        {"alpha", cfg.alpha},
        {"correction", correction_name(cfg.correction)},
        {"var_assumption", var_assumption_name(cfg.var_assumption)},
        {"exact_threshold", cfg.exact_threshold},
    };
}

nlohmann::json summaries_to_json(const std::vector<SampleSummary>& summaries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : summaries) {
        arr.push_back({{"n", s.n}, {"mean", json_number(s.mean)}, {"sd", json_number(s.sd)}});
    }
    return arr;
}

}  // namespace

nlohmann::json result_to_json(const PermutationResult& res,
                              const std::vector<std::string>& variable_names,
                              bool include_dists) {
    nlohmann::json root;
    root["schema"] = "permstat/1";
    root["family"] = res.family;
    root["config"] = config_to_json(res.config);
    root["exact"] = res.exact;
    root["n_rearrangements"] = res.n_rearrangements;
    root["warnings"] = res.warnings;

    nlohmann::json vars = nlohmann::json::array();
    for (std::size_t v = 0; v < res.variables.size(); ++v) {
        const VariableResult& var = res.variables[v];
        nlohmann::json rec;
        if (var.var_a >= 0) {
            rec["var_a"] = var.var_a;
            rec["var_b"] = var.var_b;
            if (static_cast<std::size_t>(var.var_a) < variable_names.size()) {
                rec["name_a"] = variable_names[static_cast<std::size_t>(var.var_a)];
                rec["name_b"] = variable_names[static_cast<std::size_t>(var.var_b)];
            }
        } else {
            rec["variable"] = v;
            if (v < variable_names.size()) rec["name"] = variable_names[v];
        }
        if (var.error) {
            rec["error"] = *var.error;
        } else {
            rec["error"] = nullptr;
            rec["statistic"] = json_number(var.statistic);
            rec["df"] = json_number(var.df);
            if (std::isfinite(var.df2)) rec["df2"] = var.df2;
            rec["p"] = json_number(var.p);
            rec["p_raw"] = json_number(var.p_raw);
            rec["ci"] = nlohmann::json::array({json_number(var.ci_lower),
                                               json_number(var.ci_upper)});
            rec["estimate"] = json_number(var.estimate);
            rec["se"] = json_number(var.se);
            rec["observed_extreme"] = json_number(var.observed_extreme);
        }
        rec["summaries"] = summaries_to_json(var.summaries);
        vars.push_back(std::move(rec));
    }
    root["results"] = std::move(vars);

    if (include_dists) {
        if (res.null_distributions.size() == 1 && res.null_distributions.front().corrected) {
            const NullDistribution& dist = res.null_distributions.front();
            root["null_distribution"] = {
                {"corrected", true},
                {"tail", tail_name(dist.tail)},
                {"n_vars_joined", dist.n_vars_joined},
                {"exact", dist.exact},
                {"values", dist.values},
            };
        } else if (!res.null_distributions.empty()) {
            nlohmann::json dists = nlohmann::json::array();
            for (const auto& dist : res.null_distributions) {
                if (dist.values.empty()) {
                    dists.push_back(nullptr);  // failed variable
                } else {
                    dists.push_back({
                        {"corrected", false},
                        {"tail", tail_name(dist.tail)},
                        {"n_vars_joined", dist.n_vars_joined},
                        {"exact", dist.exact},
                        {"values", dist.values},
                    });
                }
            }
            root["null_distributions"] = std::move(dists);
        }
    }
    return root;
}

nlohmann::json effect_to_json(const EffectSizeResult& res,
                              const std::vector<std::string>& variable_names) {
    nlohmann::json root;
    root["schema"] = "permstat/1";
    root["family"] = "effectsize";
    root["kind"] = res.kind;
    root["config"] = {
        {"n_boot", res.config.n_boot},
        {"seed", res.config.seed},
        {"alpha", res.config.alpha},
        {"paired", res.config.paired},
        {"var_assumption", var_assumption_name(res.config.var_assumption)},
        {"bias_correct", res.config.bias_correct},
    };
    nlohmann::json vars = nlohmann::json::array();
    for (std::size_t v = 0; v < res.variables.size(); ++v) {
        const EffectVariableResult& var = res.variables[v];
        nlohmann::json rec;
        rec["variable"] = v;
        if (v < variable_names.size()) rec["name"] = variable_names[v];
        if (var.error) {
            rec["error"] = *var.error;
        } else {
            rec["error"] = nullptr;
            rec["effect"] = json_number(var.effect);
            rec["ci"] = nlohmann::json::array({json_number(var.ci_lower),
                                               json_number(var.ci_upper)});
            rec["correction_factor"] = json_number(var.correction_factor);
        }
        vars.push_back(std::move(rec));
    }
    root["results"] = std::move(vars);
    return root;
}

nlohmann::json fwer_to_json(const reference::FwerReport& report, std::uint64_t seed,
                            std::uint64_t n_perm) {
    nlohmann::json root;
    root["schema"] = "permstat/1";
    root["family"] = "fwer_sim";
    root["n_sims"] = report.n_sims;
    root["n_vars"] = report.n_vars;
    root["n_obs"] = report.n_obs;
    root["alpha"] = report.alpha;
    root["correction"] = correction_name(report.correction);
    root["effect_shift"] = report.effect_shift;
    root["n_shifted"] = report.n_shifted;
    root["empirical_fwer"] = report.empirical_fwer;
    if (report.empirical_power) {
        root["empirical_power"] = *report.empirical_power;
    } else {
        root["empirical_power"] = nullptr;
    }
    root["mc_stderr"] = report.mc_stderr;
    root["seed"] = seed;
    root["n_perm"] = n_perm;
    return root;
}

namespace {

std::string csv_name(const std::vector<std::string>& names, std::size_t v) {
    return v < names.size() ? names[v] : "v" + std::to_string(v);
}

}  // namespace

std::string result_to_csv(const PermutationResult& res,
                          const std::vector<std::string>& variable_names) {
    std::ostringstream out;
    const bool pair_mode = !res.variables.empty() && res.variables.front().var_a >= 0;
    if (pair_mode) {
        out << "var_a,var_b,statistic,df,p,p_raw,ci_lower,ci_upper,estimate,error\n";
    } else {
        out << "variable,name,statistic,df,p,p_raw,ci_lower,ci_upper,estimate,se,error\n";
    }
    for (std::size_t v = 0; v < res.variables.size(); ++v) {
        const VariableResult& var = res.variables[v];
        if (pair_mode) {
            out << var.var_a << ',' << var.var_b;
        } else {
            out << v << ',' << csv_name(variable_names, v);
        }
        out << ',' << format_double(var.statistic) << ',' << format_double(var.df) << ','
            << format_double(var.p) << ',' << format_double(var.p_raw) << ','
            << format_double(var.ci_lower) << ',' << format_double(var.ci_upper) << ','
            << format_double(var.estimate);
        if (!pair_mode) out << ',' << format_double(var.se);
        out << ',' << (var.error ? *var.error : "") << '\n';
    }
    return out.str();
}

std::string effect_to_csv(const EffectSizeResult& res,
                          const std::vector<std::string>& variable_names) {
    std::ostringstream out;
    out << "variable,name,effect,ci_lower,ci_upper,correction_factor,error\n";
    for (std::size_t v = 0; v < res.variables.size(); ++v) {
        const EffectVariableResult& var = res.variables[v];
        out << v << ',' << csv_name(variable_names, v) << ',' << format_double(var.effect) << ','
            << format_double(var.ci_lower) << ',' << format_double(var.ci_upper) << ','
            << format_double(var.correction_factor) << ',' << (var.error ? *var.error : "")
            << '\n';
    }
    return out.str();
}

void emit_plot_data(const PermutationResult& res, std::ostream& out) {
    const bool pair_mode = !res.variables.empty() && res.variables.front().var_a >= 0;
    if (pair_mode) {
        out << "var_a\tvar_b\testimate\tci_lower\tci_upper\tstatistic\tp\n";
    } else {
        out << "variable\testimate\tci_lower\tci_upper\tstatistic\tp\n";
    }
    for (std::size_t v = 0; v < res.variables.size(); ++v) {
        const VariableResult& var = res.variables[v];
        if (pair_mode) {
            out << var.var_a << '\t' << var.var_b;
        } else {
            out << v;
        }
        out << '\t' << format_double(var.estimate) << '\t' << format_double(var.ci_lower) << '\t'
            << format_double(var.ci_upper) << '\t' << format_double(var.statistic) << '\t'
            << format_double(var.p) << '\n';
    }
}

void emit_plot_data(const EffectSizeResult& res, std::ostream& out) {
    out << "variable\teffect\tci_lower\tci_upper\n";
    for (std::size_t v = 0; v < res.variables.size(); ++v) {
        const EffectVariableResult& var = res.variables[v];
        out << v << '\t' << format_double(var.effect) << '\t' << format_double(var.ci_lower)
            << '\t' << format_double(var.ci_upper) << '\n';
    }
}

}  // namespace permstat::io
