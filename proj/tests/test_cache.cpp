#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "cmm/cache.hpp"
#include "cmm/config.hpp"

using namespace cmm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / (std::string("cmm-test-") + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

bool any_line(const CacheLog& log, const std::string& prefix) {
    for (const auto& l : log.lines)
        if (l.rfind(prefix, 0) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("serialization round-trips bit for bit") {
    const Workspace ws = Workspace::build(ModelSpec::gaussian(0.5));
    const std::string key = bimoment_cache_key(ws.model(), ws.degree(), ws.options().order);
    const std::string text = serialize_bimoments(ws.bimoments(), key);
    std::string why;
    const auto bm = parse_bimoments(text, key, &why);
    REQUIRE(bm);
    CHECK(bm->entries == ws.bimoments().entries);
    CHECK(bm->gram == ws.bimoments().gram);
    CHECK(bm->left_basis == ws.bimoments().left_basis);

    const std::string skey = system_cache_key(key, ws.options().factor);
    const auto sys = parse_system(serialize_system(ws.system(), skey), skey, &why);
    REQUIRE(sys);
    for (int i = 0; i <= ws.degree(); ++i) CHECK(sys->norm(i) == ws.system().norm(i));
    CHECK(sys->p_basis_coeffs() == ws.system().p_basis_coeffs());
    CHECK(sys->condition() == ws.system().condition());
}

TEST_CASE("damaged or mismatched text is rejected with a reason") {
    const Workspace ws = Workspace::build(ModelSpec::gaussian(0.5));
    const std::string key = bimoment_cache_key(ws.model(), ws.degree(), ws.options().order);
    std::string text = serialize_bimoments(ws.bimoments(), key);
    std::string why;
    CHECK_FALSE(parse_bimoments(text, "0000000000000000", &why));
    CHECK_FALSE(why.empty());
    text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
    why.clear();
    CHECK_FALSE(parse_bimoments(text, key, &why));
    CHECK_FALSE(why.empty());
    CHECK_FALSE(parse_bimoments("", key, &why));
}

TEST_CASE("keys separate models, degrees, orders and options") {
    const ModelSpec a = ModelSpec::gaussian(0.5), b = ModelSpec::gaussian(0.4);
    CHECK(bimoment_cache_key(a, 12, 64) != bimoment_cache_key(b, 12, 64));
    CHECK(bimoment_cache_key(a, 12, 64) != bimoment_cache_key(a, 11, 64));
    CHECK(bimoment_cache_key(a, 12, 64) != bimoment_cache_key(a, 12, 96));
    FactorizeOptions o;
    const std::string k = bimoment_cache_key(a, 12, 64);
    FactorizeOptions o2 = o;
    o2.singular_tolerance = 1e-12;
    CHECK(system_cache_key(k, o) != system_cache_key(k, o2));
}

TEST_CASE("load_or_build: miss, hit, corrupt recovery") {
    const fs::path dir = fresh_dir("lob");
    const Cache cache(dir);
    const ModelSpec m = ModelSpec::gaussian(0.5);
    WorkspaceOptions opts;
    opts.degree = 8;

    CacheLog first;
    const Workspace w1 = cache.load_or_build(m, opts, &first);
    CHECK_FALSE(first.bimoment_hit);
    CHECK(any_line(first, "cache miss: bimoments"));
    CHECK(fs::exists(cache.bimoment_path(first.bimoment_key)));
    CHECK(fs::exists(cache.system_path(first.system_key)));

    CacheLog second;
    const Workspace w2 = cache.load_or_build(m, opts, &second);
    CHECK(second.bimoment_hit);
    CHECK(second.system_hit);
    for (int i = 0; i <= 8; ++i) CHECK(w1.system().norm(i) == w2.system().norm(i));

    {
        std::ofstream out(cache.system_path(second.system_key), std::ios::app);
        out << "garbage\n";
    }
    CacheLog third;
    const Workspace w3 = cache.load_or_build(m, opts, &third);
    CHECK(third.bimoment_hit);
    CHECK_FALSE(third.system_hit);
    CHECK(any_line(third, "cache corrupt: system"));
    for (int i = 0; i <= 8; ++i) CHECK(w3.system().norm(i) == w1.system().norm(i));

    CacheLog fourth;
    (void)cache.load_or_build(m, opts, &fourth);
    CHECK(fourth.system_hit);
    fs::remove_all(dir);
}

TEST_CASE("atomic writes replace files and leave no temporaries") {
    const fs::path dir = fresh_dir("atomic");
    fs::create_directories(dir);
    atomic_write(dir / "a.txt", "one");
    atomic_write(dir / "a.txt", "two");
    CHECK(read_text(dir / "a.txt").value() == "two");
    int count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++count;
    CHECK(count == 1);
    CHECK_FALSE(read_text(dir / "missing.txt"));
    fs::remove_all(dir);
}

TEST_CASE("config grammar") {
    const RunConfig c = parse_config(R"({
        "model": {"v_left": {"terms": [[2, 0.5]]}, "v_right": [0, 0, 0.5], "kernel": {"type": "exp", "c": 0.25}},
        "compute": {"degree": 8, "order": 48},
        "task": {"correlator": "charpoly_average", "N": 2, "M": 1,
                 "z_grid": {"re": [-1, 1, 5], "im": [0.5, 1.5, 4]}},
        "output": {"format": "json"},
        "seed": 5
    })");
    CHECK(c.model == ModelSpec::gaussian(0.25));
    CHECK(c.compute.degree == 8);
    REQUIRE(c.task);
    CHECK(c.task->points.size() == 20);
    CHECK(c.output.format == OutputFormat::Json);
    CHECK(c.seed == 5);
    CHECK(c.hash.size() == 16);

    auto code_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;  // sentinel: no error
    };
    CHECK(code_of(R"({"modle": {}})") == ErrorCode::ConfigError);
    CHECK(code_of("{not json") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"model": {"kernel": {"type": "exp", "c": 2.0}}})") == ErrorCode::DivergentCoupling);
    CHECK(code_of(R"({"task": {"correlator": "pair_inverse_small", "N": 1, "M": 2,
                              "points": [{"z": [[2, 1], [3, 1]], "w": [[2, -1], [3, -1]]}]}})") ==
          ErrorCode::PreconditionViolated);
}
