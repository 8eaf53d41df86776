// cmm: build, evaluate and verify coupled two-matrix model correlators.
//
// Exit codes: 0 ok, 1 verification failure, 2 config or precondition error,
// 3 numerical error (singular, ill-conditioned, non-finite), 4 I/O error.

#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cmm/cache.hpp"
#include "cmm/config.hpp"
#include "cmm/correlators.hpp"
#include "cmm/exact.hpp"
#include "cmm/report.hpp"
#include "cmm/simd/kernels.hpp"
#include "cmm/verify.hpp"

using namespace cmm;

namespace {

struct Overrides {
    std::string config;
    int order = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    std::string cache;
    std::string level = "quick";
};

RunConfig load(const Overrides& o) {
    RunConfig c = o.config.empty() ? parse_config("{}") : load_config(o.config);
    if (o.order > 0) {
        if (o.order < c.compute.degree + 2)
            throw Error(ErrorCode::ConfigError, "--order must exceed the degree bound by at least 2");
        c.compute.order = o.order;
    }
    if (o.seed_set) c.seed = o.seed;
    if (!o.out.empty()) c.output.path = o.out;
    if (!o.cache.empty()) c.compute.cache_dir = o.cache;
    return c;
}

Workspace workspace(const RunConfig& c, CacheLog& log) {
    const Workspace ws = Cache(c.compute.cache_dir).load_or_build(c.model, c.workspace_options(), &log);
    for (const auto& line : log.lines) std::cerr << line << "\n";
    return ws;
}

void write_output(const std::filesystem::path& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    atomic_write(path, text);
    std::cerr << "wrote " << path.string() << "\n";
}

int cmd_build(const Overrides& o) {
    const RunConfig c = load(o);
    CacheLog log;
    const Workspace ws = workspace(c, log);
    const BiorthogonalSystem& sys = ws.system();
    std::printf("model %s (fingerprint %s)\n", canonical_text(c.model).c_str(), model_fingerprint(c.model).c_str());
    std::printf("degree %d, quadrature order %d\n", ws.degree(), ws.options().order);
    std::printf("bimoment cache key %s\nsystem cache key %s\n", log.bimoment_key.c_str(), log.system_key.c_str());
    for (int i = 0; i <= sys.degree(); ++i) {
        const double ratio = i == 0 ? 0.0 : sys.norm(i) / sys.norm(i - 1);
        std::printf("h_%-2d = %.17g", i, sys.norm(i));
        if (i > 0) std::printf("   h_%d/h_%d = %.6g", i, i - 1, ratio);
        std::printf("   cancellation %.3g\n", sys.cancellation_ratios()[static_cast<std::size_t>(i)]);
    }
    std::printf("condition (Jacobi-scaled Gram, 1-norm) %.3e\n", sys.condition());
    for (const ConditionWarning& w : sys.warnings()) {
        std::fprintf(stderr, "warning: IllConditioned(%d): cancellation ratio %.3e, scaled condition %.3e", w.degree,
                     w.cancellation, w.condition);
        if (w.degree > 0) std::fprintf(stderr, ", pivot ratio h_%d/h_%d = %.6g", w.degree, w.degree - 1,
                                       sys.norm(w.degree) / sys.norm(w.degree - 1));
        if (w.drift > 0) std::fprintf(stderr, ", pivot drift vs 3/4-order rule %.3e", w.drift);
        std::fprintf(stderr, "\n");
    }
    if (!sys.warnings().empty())
        std::fprintf(stderr, "warning: %zu pivot(s) flagged; raise compute.order or lower compute.degree\n",
                     sys.warnings().size());
    if (c.compute.exact) {
        const ExactGaussianSystem ex = exact_gaussian_system(c.model, ws.degree());
        const auto path = c.compute.cache_dir / ("exact-" + log.bimoment_key + ".txt");
        write_exact_sidecar(path, ex);
        double worst = 0.0;
        for (int i = 0; i <= ws.degree(); ++i) worst = std::max(worst, std::abs(sys.norm(i) / ex.h(i) - 1.0));
        std::printf("exact-rational pivots written to %s (max relative difference %.3e)\n", path.string().c_str(), worst);
    }
    return 0;
}

EvalRow evaluate(const Workspace& ws, const TaskConfig& t, int index) {
    EvalRow r;
    r.correlator = to_string(t.correlator);
    r.n = t.n;
    r.m = t.m;
    r.point_index = index;
    CorrelatorResult res;
    if (t.correlator == CorrelatorKind::PartitionFunction) {
        res = partition_function(ws.system(), t.n, &ws.bimoments());
    } else if (t.correlator == CorrelatorKind::SchurAverage) {
        res = schur_average(ws.bimoments(), t.lambda, t.mu, t.n);
    } else {
        const EvalPoint& p = t.points[static_cast<std::size_t>(index)];
        r.z = p.z;
        r.w = p.w;
        const SpectralPoints zs(p.z);
        switch (t.correlator) {
            case CorrelatorKind::CharpolyAverage: res = charpoly_average(ws.system(), t.side, t.n, zs); break;
            case CorrelatorKind::CharpolyInverseSmall: res = charpoly_inverse_average_small(ws, t.side, t.n, zs); break;
            case CorrelatorKind::CharpolyInverseLarge: res = charpoly_inverse_average_large(ws, t.side, t.n, zs); break;
            case CorrelatorKind::PairAverage: res = pair_charpoly_average(ws.system(), t.n, zs, SpectralPoints(p.w)); break;
            case CorrelatorKind::PairInverseSmall: res = pair_inverse_average_small(ws, t.n, zs, SpectralPoints(p.w)); break;
            case CorrelatorKind::PairInverseLarge: res = pair_inverse_average_large(ws, t.n, zs, SpectralPoints(p.w)); break;
            case CorrelatorKind::MixedPair:
                res = mixed_pair_average(ws, t.n, zs, SpectralPoints(p.w), t.orientation);
                break;
            case CorrelatorKind::CdKernel:
                res.value = cd_kernel(ws.system(), ws.model(), t.n, p.z[0].real(), p.w[0].real());
                break;
            default:
                break;
        }
    }
    r.value = res.value;
    r.log_scale = res.log_scale;
    r.tail = res.diagnostics.tail;
    r.cond = res.diagnostics.condition;
    return r;
}

int cmd_eval(const Overrides& o) {
    const RunConfig c = load(o);
    if (!c.task) throw Error(ErrorCode::ConfigError, "eval needs a 'task' section in the config");
    const TaskConfig& t = *c.task;
    CacheLog log;
    const Workspace ws = workspace(c, log);

    const int count = t.points.empty() ? 1 : static_cast<int>(t.points.size());
    std::vector<EvalRow> rows(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    int threads = c.compute.threads > 0 ? c.compute.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, count);
    // Static round-robin partition; every row lands in its own slot, so output order is fixed.
    auto worker = [&](int id) {
        for (int i = id; i < count; i += threads) {
            try {
                rows[static_cast<std::size_t>(i)] = evaluate(ws, t, i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < threads; ++k) pool.emplace_back(worker, k);
    worker(0);
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    Provenance prov;
    prov.config_hash = c.hash;
    prov.model_fingerprint = model_fingerprint(c.model);
    prov.bimoment_key = log.bimoment_key;
    prov.system_key = log.system_key;
    write_output(c.output.path,
                 c.output.format == OutputFormat::Csv ? render_eval_csv(rows, prov) : render_eval_json(rows, prov));
    return 0;
}

int cmd_verify(const Overrides& o) {
    const RunConfig c = load(o);
    VerifyOptions vo;
    vo.level = parse_verify_level(o.level);
    vo.seed = c.seed;
    vo.on_row = [](const CheckRow& r) {
        std::fprintf(stderr, "[%s] %-24s error %.3e bound %.1e  %s\n", r.pass ? "pass" : "FAIL", r.id.c_str(), r.error,
                     r.tolerance, r.description.c_str());
    };
    const VerifyReport rep = run_verification(vo);
    std::cout << render_verify_summary(rep);
    if (!c.output.path.empty()) {
        const bool json = c.output.path.extension() == ".json";
        write_output(c.output.path, json ? render_verify_json(rep) : render_verify_csv(rep));
    }
    return rep.all_pass() ? 0 : 1;
}

int cmd_info(const Overrides& o) {
    const RunConfig c = load(o);
    const WorkspaceOptions wo = c.workspace_options();
    const std::string bkey = bimoment_cache_key(c.model, wo.degree, wo.order);
    const std::string skey = system_cache_key(bkey, wo.factor);
    const Cache cache(c.compute.cache_dir);
    std::printf("cmm %s\n", kLibraryVersion);
    std::printf("simd kernels: %s (cpu avx2+fma: %s)\n", simd::active_kernels().name, simd::cpu_has_avx2_fma() ? "yes" : "no");
    std::printf("model: %s\nmodel fingerprint: %s\nkernel: %s\n", canonical_text(c.model).c_str(),
                model_fingerprint(c.model).c_str(), std::string(kernel_name(c.model.kernel)).c_str());
    std::printf("config hash: %s\n", c.hash.c_str());
    std::printf("degree %d, order %d, kmax %d\n", wo.degree, wo.order, wo.kmax);
    std::printf("cache dir: %s\n", c.compute.cache_dir.string().c_str());
    std::printf("  bimoments %s: %s\n", bkey.c_str(), std::filesystem::exists(cache.bimoment_path(bkey)) ? "present" : "absent");
    std::printf("  system    %s: %s\n", skey.c_str(), std::filesystem::exists(cache.system_path(skey)) ? "present" : "absent");
    std::printf("correlators:");
    for (const auto& n : correlator_names()) std::printf(" %s", n.c_str());
    std::printf("\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled two-matrix model correlators: build systems, evaluate correlators, verify."};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config, "JSON run configuration");
        sub->add_option("--order", o.order, "override compute.order (quadrature nodes per axis)");
        sub->add_option("--cache", o.cache, "override compute.cache_dir");
    };
    auto* build = app.add_subcommand("build", "build or load the bimoments and biorthogonal system; print pivots");
    add_common(build);
    auto* eval = app.add_subcommand("eval", "evaluate the config's task over its points and write a table");
    add_common(eval);
    eval->add_option("--out", o.out, "override output.path");
    auto* verify = app.add_subcommand("verify", "run the acceptance checks on the reference model");
    add_common(verify);
    verify->add_option("--level", o.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    verify->add_option("--out", o.out, "write the check report (.csv or .json)");
    auto* seed = verify->add_option("--seed", o.seed, "override the config seed");
    auto* info = app.add_subcommand("info", "print model, cache and build information");
    add_common(info);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    o.seed_set = seed->count() > 0;

    try {
        if (*build) return cmd_build(o);
        if (*eval) return cmd_eval(o);
        if (*verify) return cmd_verify(o);
        if (*info) return cmd_info(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
