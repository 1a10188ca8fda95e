#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cfdg/study.hpp"

using namespace cfdg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cfdg_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int line_count(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CFDG_STUDY_EXE) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const char* small_1d = R"(# small study
problem = advect1d_expsin
[space]
kind = P1D
degree = 2
[mesh]
family = alpha
alpha = 0.1
[study]
N = 10, 20
label = small
[time]
T = 0.5
)";

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
    const StudyConfig cfg = parse_config(small_1d);
    EXPECT_EQ(cfg.space.degree, 2);
    EXPECT_EQ(cfg.family, MeshFamily::alpha);
    EXPECT_EQ(cfg.alpha, 0.1);
    EXPECT_EQ(cfg.ns, (std::vector<int>{10, 20}));
    EXPECT_EQ(cfg.label, "small");
    EXPECT_EQ(cfg.final_time, 0.5);
}

TEST(Config, RoundTrip) {
    std::vector<StudyConfig> configs;
    configs.push_back(parse_config(small_1d));
    configs.push_back(parse_config("problem=advect2d_sin\nspace.kind=P2D\nspace.degree=3\nstudy.N=4,8\n"
                                   "mesh.family=random\nmesh.seed=18446744073709551615\nmesh.fraction=0.123456789\n"
                                   "domain.lo=-1.1\ndomain.hi=3.7\ntime.c=0.0137\n"));
    configs.push_back(parse_config("time.scheme=custom\ntime.tableau.a=0,0;1,0\ntime.tableau.b=0.5,0.5\n"
                                   "time.tableau.c=0,1\ntime.order=2\nstudy.N=10\noutput.fields=true\n"));
    for (const auto& cfg : configs) {
        const std::string text = serialize_config(cfg);
        const StudyConfig again = parse_config(text);
        EXPECT_EQ(again, cfg);
        EXPECT_EQ(serialize_config(again), text);
    }
}

TEST(Config, OverridesApply) {
    const StudyConfig cfg = parse_config(small_1d, {"space.degree=4", "study.N=10,20,40"});
    EXPECT_EQ(cfg.space.degree, 4);
    EXPECT_EQ(cfg.ns.size(), 3u);
}

TEST(Config, ErrorsCarryKeyPath) {
    const auto key_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<no error>");
    };
    EXPECT_EQ(key_of("mesh.colour = red\n"), "mesh.colour");
    EXPECT_EQ(key_of("[mesh]\nalpah = 0.1\n"), "mesh.alpah");
    EXPECT_EQ(key_of("space.degree = two\n"), "space.degree");
    EXPECT_EQ(key_of("problem = advect2d_sin\n"), "space.kind");
    EXPECT_EQ(key_of("mesh.family = random\n"), "mesh.seed");
    EXPECT_EQ(key_of("mesh.family = alpha\nmesh.alpha = 1.0\n"), "mesh.alpha");
    EXPECT_EQ(key_of("study.N = 10, 640\n"), "study.N");
    EXPECT_EQ(key_of("study.N = 20, 10\n"), "study.N");
    EXPECT_EQ(key_of("time.scheme = rk7\n"), "time.scheme");
    EXPECT_EQ(key_of("time.scheme=custom\ntime.tableau.a=0.5\ntime.tableau.b=1\ntime.tableau.c=0.5\n"), "time.tableau");
    EXPECT_NO_THROW(parse_config("study.N = 10, 640\nstudy.full_scale = true\n"));
}

TEST(Study, CsvSchemaAndValues) {
    const StudyConfig cfg = parse_config("study.N=10,20\n");
    const StudyResult r = run_study(cfg);
    ASSERT_EQ(r.table.rows.size(), 2u);
    EXPECT_NEAR(r.table.rows[0].e2 / 9.11e-3, 1.0, 0.15);
    const std::string csv = r.table.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,E2,rate2,EA,rateA,Ef,ratef");
    EXPECT_EQ(line_count(csv), 4);

    const StudyResult r2 = run_study(parse_config("problem=advect2d_sin\nspace.kind=Q2D\nspace.degree=1\nstudy.N=4,8\n"));
    const std::string csv2 = r2.table.to_csv();
    EXPECT_EQ(csv2.substr(0, csv2.find('\n')), "N,E2,rate2,EA,rateA");
}

TEST(Study, TruncationRule) {
    EXPECT_TRUE(below_truncation_threshold(1e-14));
    EXPECT_FALSE(below_truncation_threshold(1e-13));
    const StudyResult r = run_study(parse_config("space.degree=0\nstudy.N=10,20,40\nstudy.truncate=true\n"));
    EXPECT_EQ(r.table.rows.size(), 3u);
    EXPECT_FALSE(r.truncated);
}

TEST(Study, ReproducibleBytes) {
    const StudyConfig cfg = parse_config("mesh.family=random\nmesh.seed=42\nstudy.N=10,20\noutput.fields=true\n");
    const fs::path a = scratch_dir("repro_a"), b = scratch_dir("repro_b");
    write_study_outputs(cfg, run_study(cfg), a);
    write_study_outputs(cfg, run_study(cfg), b);
    for (const char* name : {"table.csv", "table.md", "config.txt", "mesh_N10.csv", "mesh_N20.csv", "field_N20.csv"}) {
        ASSERT_TRUE(fs::exists(a / name)) << name;
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
    EXPECT_EQ(parse_config(slurp(a / "config.txt")), cfg);
    const std::string field = slurp(a / "field_N10.csv");
    EXPECT_EQ(field.substr(0, field.find('\n')), "xc,c0,c1,c2");
    EXPECT_EQ(line_count(field), 11);
    for (const auto& entry : fs::directory_iterator(a)) EXPECT_NE(entry.path().extension(), ".tmp");
}

TEST(Study, RandomMeshNodesAreAuditable) {
    const StudyConfig cfg = parse_config("mesh.family=random\nmesh.seed=7\nstudy.N=10\n");
    const fs::path dir = scratch_dir("audit");
    write_study_outputs(cfg, run_study(cfg), dir);
    std::istringstream in(slurp(dir / "mesh_N10.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x");
    const Mesh1D mesh = build_mesh_1d(cfg, 10);
    for (double x : mesh.nodes()) {
        ASSERT_TRUE(std::getline(in, line));
        EXPECT_EQ(std::stod(line), x);
    }
}

TEST(DumpMesh, Examples) {
    const fs::path dir = scratch_dir("dump");
    const auto uniform = dump_mesh(parse_config("study.N=4\ndomain.lo=0\ndomain.hi=1\n"), dir / "u");
    ASSERT_EQ(uniform.size(), 1u);
    EXPECT_EQ(line_count(slurp(uniform[0])), 6);

    const auto alpha = dump_mesh(parse_config("study.N=4\nmesh.family=alpha\nmesh.alpha=0.1\ndomain.lo=0\ndomain.hi=1\n"), dir / "a");
    std::istringstream in(slurp(alpha[0]));
    std::string line;
    std::getline(in, line);
    for (double x : {0.0, 0.275, 0.5, 0.775, 1.0}) {
        std::getline(in, line);
        EXPECT_NEAR(std::stod(line), x, 1e-15);
    }

    const auto fig = dump_mesh(
        parse_config("problem=advect2d_sin\nspace.kind=Q2D\nstudy.N=17\nmesh.family=alpha\nmesh.alpha=0.3\n"), dir / "f");
    ASSERT_EQ(fig.size(), 2u);
    EXPECT_EQ(line_count(slurp(fig[0])), 19);
    EXPECT_EQ(line_count(slurp(fig[1])), 19);
}

TEST(Output, RootOverride) {
    const StudyConfig cfg = parse_config("output.dir=sub/dir\n");
    ::setenv("CFDG_OUTPUT_ROOT", "/tmp/root_x", 1);
    EXPECT_EQ(resolve_output_dir(cfg), fs::path("/tmp/root_x/sub/dir"));
    ::unsetenv("CFDG_OUTPUT_ROOT");
    EXPECT_EQ(resolve_output_dir(cfg), fs::path("sub/dir"));
    const StudyConfig abs = parse_config("output.dir=/abs/path\n");
    ::setenv("CFDG_OUTPUT_ROOT", "/tmp/root_x", 1);
    EXPECT_EQ(resolve_output_dir(abs), fs::path("/abs/path"));
    ::unsetenv("CFDG_OUTPUT_ROOT");
}

TEST(ShippedConfigs, AllParse) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(CFDG_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 9);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch_dir("cli");
    const fs::path good = dir / "good.cfg";
    const fs::path bad = dir / "bad.cfg";
    const fs::path diverge = dir / "diverge.cfg";
    write_file_atomic(good, std::string("study.N=10,20\ntime.T=0.1\noutput.dir=") + (dir / "out").string() + "\n");
    write_file_atomic(bad, "mesh.family=random\n");
    write_file_atomic(diverge, std::string("study.N=10\ntime.c=50\ntime.T=5000\ntime.scheme=euler\noutput.dir=") +
                                   (dir / "div").string() + "\n");
    EXPECT_EQ(run_cli("run " + good.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "table.csv"));
    EXPECT_EQ(run_cli("run " + bad.string()), 1);
    EXPECT_EQ(run_cli("run " + good.string() + " --set mesh.bogus=1"), 1);
    EXPECT_EQ(run_cli("run " + diverge.string()), 2);
    EXPECT_EQ(run_cli("verify projection"), 0);
    EXPECT_EQ(run_cli("verify nonsense"), 1);
    EXPECT_EQ(run_cli("dump-mesh " + good.string() + " --out " + (dir / "mesh").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "mesh" / "mesh_N20.csv"));
}
