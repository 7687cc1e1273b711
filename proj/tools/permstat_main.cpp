// permstat: multivariate permutation tests, max-statistic multiple-comparison
// correction, and bootstrapped effect sizes over CSV/TSV tables.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "permstat/effectsize.hpp"
#include "permstat/io.hpp"
#include "permstat/permtests.hpp"
#include "permstat/reference.hpp"
#include "permstat/simd.hpp"

namespace {

using namespace permstat;

struct CommonOpts {
    std::string x_path;
    std::string y_path;
    std::string out_path;
    std::string plot_path;
    std::string format = "json";
    std::string delimiter;
    bool no_header = false;
    bool no_dist = false;
    TestConfig cfg;
    std::string tail = "two";
    std::string correction = "max";
    std::string var_assumption = "equal";
};

void add_io_flags(CLI::App* cmd, CommonOpts& opt, bool with_y) {
    cmd->add_option("--x", opt.x_path, "input table for sample X (CSV/TSV)")->required();
    if (with_y) cmd->add_option("--y", opt.y_path, "input table for sample Y");
    cmd->add_option("--out", opt.out_path, "write results to a file instead of stdout");
    cmd->add_option("--plot-data", opt.plot_path, "write per-variable plot data (TSV)");
    cmd->add_option("--format", opt.format, "output format: json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--delimiter", opt.delimiter, "input field delimiter (default: auto)");
    cmd->add_flag("--no-header", opt.no_header, "input files carry no header row");
    cmd->add_flag("--no-dist", opt.no_dist, "omit the null distribution from JSON output");
}

void add_test_flags(CLI::App* cmd, CommonOpts& opt) {
    cmd->add_option("--nperm", opt.cfg.n_perm, "number of permutations (default 10000)");
    cmd->add_option("--seed", opt.cfg.seed, "random seed (default 0)");
    cmd->add_option("--alpha", opt.cfg.alpha, "significance level for CIs (default 0.05)");
    cmd->add_option("--tail", opt.tail, "two | right | left")
        ->check(CLI::IsMember({"two", "right", "left"}));
    cmd->add_option("--correction", opt.correction, "max | bonferroni | holm | none")
        ->check(CLI::IsMember({"max", "bonferroni", "holm", "none"}));
    cmd->add_option("--var", opt.var_assumption, "variance assumption: equal | unequal")
        ->check(CLI::IsMember({"equal", "unequal"}));
    cmd->add_option("--exact-threshold", opt.cfg.exact_threshold,
                    "enumerate exhaustively at or below this many rearrangements");
    cmd->add_option("--threads", opt.cfg.n_threads,
                    "worker thread cap (default: PERMSTAT_THREADS or hardware)");
}

TestConfig resolve_cfg(CommonOpts& opt) {
    opt.cfg.tail = *tail_from_name(opt.tail);
    opt.cfg.correction = *correction_from_name(opt.correction);
    opt.cfg.var_assumption = *var_assumption_from_name(opt.var_assumption);
    return opt.cfg;
}

io::TableSpec wide_spec(const CommonOpts& opt, const std::string& path) {
    io::TableSpec spec;
    spec.path = path;
    spec.header = !opt.no_header;
    if (!opt.delimiter.empty()) spec.delimiter = opt.delimiter.front();
    return spec;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            out.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw Error(ErrorCode::BadArgument, "cannot parse numeric list entry: " + field);
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
}

void emit_result(const CommonOpts& opt, const PermutationResult& res,
                 const std::vector<std::string>& names) {
    for (const auto& warning : res.warnings) std::cerr << "warning: " << warning << "\n";
    std::string text;
    if (opt.format == "csv") {
        text = io::result_to_csv(res, names);
    } else {
        text = io::result_to_json(res, names, !opt.no_dist).dump(2);
        text += "\n";
    }
    write_text(opt.out_path, text);
    if (!opt.plot_path.empty()) {
        std::ofstream plot(opt.plot_path);
        if (!plot) throw Error(ErrorCode::IoError, "cannot write " + opt.plot_path);
        io::emit_plot_data(res, plot);
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"permutation tests, max correction, and bootstrapped effect sizes"};
    app.require_subcommand(1);
    std::string simd_choice;
    app.add_option("--simd", simd_choice, "force a kernel backend: scalar | avx2 | neon")
        ->check(CLI::IsMember({"scalar", "avx2", "neon"}));

    // --- ttest -------------------------------------------------------------
    CommonOpts t1;
    std::string t1_mu;
    auto* c_t1 = app.add_subcommand("ttest", "one-sample or paired permutation t-test");
    add_io_flags(c_t1, t1, true);
    add_test_flags(c_t1, t1);
    c_t1->add_option("--mu", t1_mu, "null mean(s), scalar or comma-list (default 0)");

    // --- ttest2 ------------------------------------------------------------
    CommonOpts t2;
    auto* c_t2 = app.add_subcommand("ttest2", "two-sample permutation t-test");
    add_io_flags(c_t2, t2, true);
    add_test_flags(c_t2, t2);

    // --- vartest2 ----------------------------------------------------------
    CommonOpts vt;
    auto* c_vt = app.add_subcommand("vartest2", "two-sample permutation variance test (F)");
    add_io_flags(c_vt, vt, true);
    add_test_flags(c_vt, vt);

    // --- ztest -------------------------------------------------------------
    CommonOpts zt;
    std::string zt_mu, zt_sigma;
    auto* c_zt = app.add_subcommand("ztest", "one-sample permutation Z-test (known sigma)");
    add_io_flags(c_zt, zt, false);
    add_test_flags(c_zt, zt);
    c_zt->add_option("--mu", zt_mu, "null mean(s), scalar or comma-list (default 0)");
    c_zt->add_option("--sigma", zt_sigma, "population sd(s), scalar or comma-list")->required();

    // --- corr --------------------------------------------------------------
    CommonOpts co;
    std::string co_type = "pearson";
    auto* c_co = app.add_subcommand("corr", "permutation correlation test");
    add_io_flags(c_co, co, true);
    add_test_flags(c_co, co);
    c_co->add_option("--type", co_type, "pearson | spearman | rankit")
        ->check(CLI::IsMember({"pearson", "spearman", "rankit"}));

    // --- anova1 ------------------------------------------------------------
    CommonOpts a1;
    std::string a1_data, a1_value = "value", a1_group = "group";
    auto* c_a1 = app.add_subcommand("anova1", "one-way permutation ANOVA (long table)");
    c_a1->add_option("--data", a1_data, "long-layout table")->required();
    c_a1->add_option("--value", a1_value, "value column name (default: value)");
    c_a1->add_option("--group", a1_group, "group column name (default: group)");
    c_a1->add_option("--out", a1.out_path, "write results to a file instead of stdout");
    c_a1->add_option("--plot-data", a1.plot_path, "write plot data (TSV)");
    c_a1->add_option("--format", a1.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    c_a1->add_option("--delimiter", a1.delimiter, "input field delimiter (default: auto)");
    c_a1->add_flag("--no-header", a1.no_header, "table carries no header row");
    c_a1->add_flag("--no-dist", a1.no_dist, "omit the null distribution from JSON output");
    add_test_flags(c_a1, a1);
    a1.tail = "right";

    // --- anova2 ------------------------------------------------------------
    CommonOpts a2;
    std::string a2_data, a2_value = "value", a2_fa = "factor_a", a2_fb = "factor_b";
    auto* c_a2 = app.add_subcommand("anova2", "balanced two-way permutation ANOVA (long table)");
    c_a2->add_option("--data", a2_data, "long-layout table")->required();
    c_a2->add_option("--value", a2_value, "value column name (default: value)");
    c_a2->add_option("--factor-a", a2_fa, "factor A column name (default: factor_a)");
    c_a2->add_option("--factor-b", a2_fb, "factor B column name (default: factor_b)");
    c_a2->add_option("--out", a2.out_path, "write results to a file instead of stdout");
    c_a2->add_option("--plot-data", a2.plot_path, "write plot data (TSV)");
    c_a2->add_option("--format", a2.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    c_a2->add_option("--delimiter", a2.delimiter, "input field delimiter (default: auto)");
    c_a2->add_flag("--no-header", a2.no_header, "table carries no header row");
    c_a2->add_flag("--no-dist", a2.no_dist, "omit the null distribution from JSON output");
    add_test_flags(c_a2, a2);
    a2.tail = "right";

    // --- effectsize ----------------------------------------------------------
    CommonOpts ef;
    std::string ef_effect = "cohen", ef_control = "y";
    bool ef_paired = false, ef_no_bias = false;
    BootConfig boot;
    auto* c_ef = app.add_subcommand("effectsize", "bootstrapped effect sizes");
    add_io_flags(c_ef, ef, true);
    c_ef->add_option("--effect", ef_effect, "cohen | glass | cliff | meandiff | mediandiff")
        ->check(CLI::IsMember({"cohen", "glass", "cliff", "meandiff", "mediandiff"}));
    c_ef->add_option("--nboot", boot.n_boot, "number of bootstrap resamples (default 10000)");
    c_ef->add_option("--seed", boot.seed, "random seed (default 0)");
    c_ef->add_option("--alpha", boot.alpha, "CI level alpha (default 0.05)");
    c_ef->add_option("--paired", ef_paired, "paired resampling (true/false)");
    c_ef->add_flag("--no-bias-correction", ef_no_bias,
                   "disable the small-sample bias correction");
    c_ef->add_option("--control", ef_control, "Glass' delta control sample: y | x")
        ->check(CLI::IsMember({"x", "y"}));
    c_ef->add_option("--var", ef.var_assumption, "variance assumption: equal | unequal")
        ->check(CLI::IsMember({"equal", "unequal"}));
    c_ef->add_option("--threads", boot.n_threads, "worker thread cap");

    // --- fwer-sim ------------------------------------------------------------
    std::size_t fs_nvars = 20, fs_nobs = 30, fs_nshifted = 0;
    std::uint64_t fs_nsims = 1000, fs_seed = 0, fs_nperm = 2000;
    double fs_alpha = 0.05, fs_shift = 0.0;
    unsigned fs_threads = 0;
    std::string fs_correction = "max", fs_out;
    auto* c_fs = app.add_subcommand("fwer-sim",
                                    "Monte Carlo family-wise error / power simulation");
    c_fs->add_option("--nvars", fs_nvars, "variables per dataset (default 20)");
    c_fs->add_option("--nobs", fs_nobs, "observations per group (default 30)");
    c_fs->add_option("--nsims", fs_nsims, "number of simulated datasets (default 1000)");
    c_fs->add_option("--alpha", fs_alpha, "significance level (default 0.05)");
    c_fs->add_option("--correction", fs_correction, "max | bonferroni | holm | none")
        ->check(CLI::IsMember({"max", "bonferroni", "holm", "none"}));
    c_fs->add_option("--shift", fs_shift, "effect shift applied to designated variables");
    c_fs->add_option("--nshifted", fs_nshifted,
                     "number of shifted variables (default nvars/2 when --shift is set)");
    c_fs->add_option("--seed", fs_seed, "random seed (default 0)");
    c_fs->add_option("--nperm", fs_nperm, "permutations per inner test (default 2000)");
    c_fs->add_option("--threads", fs_threads, "worker thread cap");
    c_fs->add_option("--out", fs_out, "write the report to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // flag validation failures
    }

    if (!simd_choice.empty()) {
        if (simd_choice == "scalar") simd::select_backend(simd::Backend::Scalar);
        if (simd_choice == "avx2") simd::select_backend(simd::Backend::Avx2);
        if (simd_choice == "neon") simd::select_backend(simd::Backend::Neon);
    }

    if (c_t1->parsed()) {
        const auto cfg = resolve_cfg(t1);
        const auto x = io::load_wide(wide_spec(t1, t1.x_path));
        std::optional<io::WideTable> y;
        if (!t1.y_path.empty()) y = io::load_wide(wide_spec(t1, t1.y_path));
        const auto res = permuttest(x.data, y ? &y->data : nullptr, parse_double_list(t1_mu), cfg);
        emit_result(t1, res, x.column_names);
        return 0;
    }
    if (c_t2->parsed()) {
        const auto cfg = resolve_cfg(t2);
        if (t2.y_path.empty()) throw Error(ErrorCode::BadArgument, "ttest2 requires --y");
        const auto x = io::load_wide(wide_spec(t2, t2.x_path));
        const auto y = io::load_wide(wide_spec(t2, t2.y_path));
        const auto res = permuttest2(x.data, y.data, cfg);
        emit_result(t2, res, x.column_names);
        return 0;
    }
    if (c_vt->parsed()) {
        const auto cfg = resolve_cfg(vt);
        if (vt.y_path.empty()) throw Error(ErrorCode::BadArgument, "vartest2 requires --y");
        const auto x = io::load_wide(wide_spec(vt, vt.x_path));
        const auto y = io::load_wide(wide_spec(vt, vt.y_path));
        const auto res = permuvartest2(x.data, y.data, cfg);
        emit_result(vt, res, x.column_names);
        return 0;
    }
    if (c_zt->parsed()) {
        const auto cfg = resolve_cfg(zt);
        const auto x = io::load_wide(wide_spec(zt, zt.x_path));
        const auto res =
            permuztest(x.data, parse_double_list(zt_mu), parse_double_list(zt_sigma), cfg);
        emit_result(zt, res, x.column_names);
        return 0;
    }
    if (c_co->parsed()) {
        const auto cfg = resolve_cfg(co);
        const auto x = io::load_wide(wide_spec(co, co.x_path));
        std::optional<io::WideTable> y;
        if (!co.y_path.empty()) y = io::load_wide(wide_spec(co, co.y_path));
        kernels::CorrelationKind kind = kernels::CorrelationKind::Pearson;
        if (co_type == "spearman") kind = kernels::CorrelationKind::Spearman;
        if (co_type == "rankit") kind = kernels::CorrelationKind::Rankit;
        const auto res = permucorr(x.data, y ? &y->data : nullptr, kind, cfg);
        emit_result(co, res, x.column_names);
        return 0;
    }
    if (c_a1->parsed()) {
        const auto cfg = resolve_cfg(a1);
        io::TableSpec spec = wide_spec(a1, a1_data);
        spec.layout = io::TableLayout::Long;
        spec.value_column = a1_value;
        spec.group_columns = {a1_group};
        const auto table = io::load_long(spec);
        const auto res = permuanova1(table.values, table.group_a, cfg);
        emit_result(a1, res, {});
        return 0;
    }
    if (c_a2->parsed()) {
        const auto cfg = resolve_cfg(a2);
        io::TableSpec spec = wide_spec(a2, a2_data);
        spec.layout = io::TableLayout::Long;
        spec.value_column = a2_value;
        spec.group_columns = {a2_fa, a2_fb};
        const auto table = io::load_long(spec);
        const auto res = permuanova2(table.values, table.group_a, table.group_b, cfg);
        // Three effects, one JSON document.
        nlohmann::json root;
        root["schema"] = "permstat/1";
        root["family"] = "anova2";
        root["factor_a"] = io::result_to_json(res.factor_a, {}, !a2.no_dist);
        root["factor_b"] = io::result_to_json(res.factor_b, {}, !a2.no_dist);
        root["interaction"] = io::result_to_json(res.interaction, {}, !a2.no_dist);
        for (const auto& w : res.factor_a.warnings) std::cerr << "warning: " << w << "\n";
        if (a2.format == "csv") {
            std::string text = io::result_to_csv(res.factor_a, {"factor_a"});
            std::string more = io::result_to_csv(res.factor_b, {"factor_b"});
            std::string inter = io::result_to_csv(res.interaction, {"interaction"});
            more.erase(0, more.find('\n') + 1);
            inter.erase(0, inter.find('\n') + 1);
            write_text(a2.out_path, text + more + inter);
        } else {
            write_text(a2.out_path, root.dump(2) + "\n");
        }
        if (!a2.plot_path.empty()) {
            std::ofstream plot(a2.plot_path);
            if (!plot) throw Error(ErrorCode::IoError, "cannot write " + a2.plot_path);
            io::emit_plot_data(res.factor_a, plot);
            io::emit_plot_data(res.factor_b, plot);
            io::emit_plot_data(res.interaction, plot);
        }
        return 0;
    }
    if (c_ef->parsed()) {
        boot.paired = ef_paired;
        boot.bias_correct = !ef_no_bias;
        boot.var_assumption = *var_assumption_from_name(ef.var_assumption);
        const auto kind = *effect_kind_from_name(ef_effect);
        const auto control = ef_control == "x" ? ControlSample::X : ControlSample::Y;
        const auto x = io::load_wide(wide_spec(ef, ef.x_path));
        std::optional<io::WideTable> y;
        if (!ef.y_path.empty()) y = io::load_wide(wide_spec(ef, ef.y_path));
        const auto res = booteffectsize(x.data, y ? &y->data : nullptr, kind, boot, control);
        std::string text;
        if (ef.format == "csv") {
            text = io::effect_to_csv(res, x.column_names);
        } else {
            text = io::effect_to_json(res, x.column_names).dump(2) + "\n";
        }
        write_text(ef.out_path, text);
        if (!ef.plot_path.empty()) {
            std::ofstream plot(ef.plot_path);
            if (!plot) throw Error(ErrorCode::IoError, "cannot write " + ef.plot_path);
            io::emit_plot_data(res, plot);
        }
        return 0;
    }
    if (c_fs->parsed()) {
        const auto correction = *correction_from_name(fs_correction);
        if (fs_shift != 0.0 && fs_nshifted == 0) fs_nshifted = fs_nvars / 2;
        const auto report = reference::fwer_sim(fs_nvars, fs_nobs, fs_nsims, fs_alpha, correction,
                                                fs_shift, fs_nshifted, fs_seed, fs_nperm,
                                                fs_threads);
        write_text(fs_out, io::fwer_to_json(report, fs_seed, fs_nperm).dump(2) + "\n");
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const permstat::Error& e) {
        std::cerr << "error: " << e.what() << " [" << permstat::error_code_name(e.code())
                  << "]\n";
        return e.is_validation() ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
