#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "airkit/data_io.hpp"

using namespace airkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("airkit_io_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

SymbolBatch make_batch(const Constellation& c, std::uint64_t n) {
    ChannelScenario sc;
    sc.snr_db_per_2d = 11.0;
    sc.n = n;
    sc.seed = 321;
    SymbolBatch b = simulate(c, sc, 2);
    b.meta.split = "train:17";
    return b;
}

}  // namespace

TEST_CASE("batch files round trip field by field") {
    TempDir tmp;
    const Constellation c = build_qam(16);
    const SymbolBatch original = make_batch(c, 1000);
    const std::string path = tmp.file("batch.bin");
    write_batch(original, c, path);

    const LoadedBatch loaded = read_batch(path);
    CHECK(loaded.constellation.name == "16QAM");
    CHECK(loaded.batch.tx == original.tx);
    CHECK(loaded.batch.rx == original.rx);
    CHECK(loaded.batch.meta.scenario == original.meta.scenario);
    CHECK(loaded.batch.meta.seed == original.meta.seed);
    CHECK(loaded.batch.meta.batch_id == original.meta.batch_id);
    CHECK(loaded.batch.meta.split == original.meta.split);

    // writing the loaded batch again reproduces the file bit for bit
    const std::string path2 = tmp.file("batch2.bin");
    write_batch(loaded.batch, loaded.constellation, path2);
    CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("corrupted batch files are rejected with diagnostics") {
    TempDir tmp;
    const Constellation c = build_qam(16);
    const SymbolBatch original = make_batch(c, 100);
    const std::string path = tmp.file("batch.bin");
    write_batch(original, c, path);
    const std::string good = read_file(path);

    SUBCASE("bad magic") {
        std::string bad = good;
        bad[0] = 'X';
        write_file(tmp.file("bad.bin"), bad);
        CHECK_THROWS_WITH_AS(read_batch(tmp.file("bad.bin")), doctest::Contains("magic"),
                             std::runtime_error);
    }
    SUBCASE("unsupported version") {
        std::string bad = good;
        bad[8] = 9;
        write_file(tmp.file("bad.bin"), bad);
        CHECK_THROWS_WITH_AS(read_batch(tmp.file("bad.bin")), doctest::Contains("version"),
                             std::runtime_error);
    }
    SUBCASE("truncated mid-record names the offset") {
        const std::string bad = good.substr(0, good.size() - 7);
        write_file(tmp.file("bad.bin"), bad);
        CHECK_THROWS_WITH_AS(read_batch(tmp.file("bad.bin")),
                             doctest::Contains("complete records"), std::runtime_error);
    }
    SUBCASE("one whole record missing is reported, not silently truncated") {
        const std::string bad = good.substr(0, good.size() - 34);
        write_file(tmp.file("bad.bin"), bad);
        CHECK_THROWS_WITH_AS(read_batch(tmp.file("bad.bin")), doctest::Contains("99"),
                             std::runtime_error);
    }
    SUBCASE("trailing bytes rejected") {
        const std::string bad = good + "junk";
        write_file(tmp.file("bad.bin"), bad);
        CHECK_THROWS_WITH_AS(read_batch(tmp.file("bad.bin")), doctest::Contains("trailing"),
                             std::runtime_error);
    }
    SUBCASE("out-of-range symbol index") {
        std::string bad = good;
        // first record starts after the header; find it by size arithmetic:
        // total = header + 100 * 34
        const std::size_t header = good.size() - 100 * 34;
        bad[header] = static_cast<char>(0xFF);
        bad[header + 1] = static_cast<char>(0xFF);
        write_file(tmp.file("bad.bin"), bad);
        CHECK_THROWS_WITH_AS(read_batch(tmp.file("bad.bin")), doctest::Contains("tx index"),
                             std::runtime_error);
    }
}

TEST_CASE("csv capture fallback") {
    TempDir tmp;
    const Constellation c = build_qam(16);
    const std::string path = tmp.file("capture.csv");
    write_file(path,
               "tx_index,y1,y2,y3,y4\n"
               "0,0.1,0.2,-0.3,0.4\n"
               "255,-0.1,0.0,0.25,-0.5\n");
    const LoadedBatch loaded = read_batch_csv(path, c);
    REQUIRE(loaded.batch.size() == 2);
    CHECK(loaded.batch.tx[0] == 0);
    CHECK(loaded.batch.tx[1] == 255);
    CHECK(loaded.batch.rx[1] == 0.2);
    CHECK(loaded.batch.rx[7] == -0.5);

    write_file(tmp.file("nohdr.csv"), "0,0.1,0.2,0.3,0.4\n");
    CHECK_THROWS_AS(read_batch_csv(tmp.file("nohdr.csv"), c), std::runtime_error);
    write_file(tmp.file("short.csv"), "tx_index,y1,y2,y3,y4\n0,0.1,0.2\n");
    CHECK_THROWS_AS(read_batch_csv(tmp.file("short.csv"), c), std::runtime_error);
}

TEST_CASE("model serialization round trips bit-faithfully") {
    TempDir tmp;
    const Constellation c = build_qam(16);
    ChannelScenario sc;
    sc.snr_db_per_2d = 13.0;
    sc.n = 30000;
    sc.seed = 77;
    const SymbolBatch train = simulate(c, sc, 0);

    FitOptions fit_opts;
    fit_opts.min_samples_per_point = 50;
    for (const char* kind : {"2D-iidG", "2D-CG", "1D-iidG", "4D-iidG"}) {
        const AuxChannelModel model = fit(ModelKind::parse(kind), c, train, fit_opts);
        const std::string text = model_to_text(model);
        const AuxChannelModel back = model_from_text(text);
        CHECK(model_to_text(back) == text);
        CHECK(back.kind() == model.kind());
        CHECK(back.epsilon() == model.epsilon());
        CHECK(back.trained_on().scenario == train.meta.scenario);

        // identical parameters imply identical densities
        const std::vector<double> y(static_cast<std::size_t>(model.d()), 0.123);
        for (int t = 0; t < model.n_sub(); ++t) {
            CHECK(back.logpdf(t, 3, y) == model.logpdf(t, 3, y));
            CHECK(back.log_output_density(t, y) == model.log_output_density(t, y));
        }
    }

    const AuxChannelModel model = fit(ModelKind::parse("2D-CG"), c, train);
    const std::string path = tmp.file("model.txt");
    write_model(model, path);
    const AuxChannelModel back = read_model(path);
    CHECK(model_to_text(back) == model_to_text(model));
}

TEST_CASE("model text parser rejects malformed input") {
    CHECK_THROWS_AS(model_from_text("not a model"), std::runtime_error);
    CHECK_THROWS_WITH_AS(model_from_text("airkit-model v1\nbogus 3\n"),
                         doctest::Contains("unknown header field"), std::runtime_error);
    const Constellation c = build_qam(16);
    ChannelScenario sc;
    sc.n = 20000;
    sc.seed = 1;
    const AuxChannelModel m = fit(ModelKind::parse("2D-iidG"), c, simulate(c, sc, 0));
    std::string text = model_to_text(m);
    text = text.substr(0, text.size() - 4);  // drop the end marker
    CHECK_THROWS_WITH_AS(model_from_text(text), doctest::Contains("end"), std::runtime_error);
}

TEST_CASE("run configuration: defaults, validation, fail-closed keys") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("run.cfg");

    SUBCASE("minimal config gets documented defaults") {
        write_file(cfg_path,
                   "# comment line\n"
                   "constellation = 16QAM\n"
                   "scenario = awgn snr=12 n=50000 seed=3\n");
        const RunConfig cfg = load_config(cfg_path);
        CHECK(cfg.constellation == "16QAM");
        REQUIRE(cfg.scenarios.size() == 1);
        CHECK(cfg.scenarios[0].snr_db_per_2d == 12.0);
        CHECK(cfg.models.size() == 5);
        CHECK(cfg.estimate_mi);
        CHECK(cfg.estimate_gmi);
        CHECK(cfg.split_ratio == 0.5);
        CHECK(cfg.batches == 4);
        CHECK(cfg.gmi_means == "static");
    }
    SUBCASE("split ratio outside (0,1) is rejected") {
        write_file(cfg_path, "split_ratio = 1.2\n");
        CHECK_THROWS_WITH_AS(load_config(cfg_path), doctest::Contains("split_ratio"),
                             std::runtime_error);
    }
    SUBCASE("unknown keys are rejected") {
        write_file(cfg_path, "constellation = 16QAM\nsnr = 12\n");
        CHECK_THROWS_WITH_AS(load_config(cfg_path), doctest::Contains("unknown configuration key"),
                             std::runtime_error);
    }
    SUBCASE("missing referenced batch file fails at load") {
        write_file(cfg_path, "input = /nonexistent/batch.bin\n");
        CHECK_THROWS_WITH_AS(load_config(cfg_path), doctest::Contains("does not exist"),
                             std::runtime_error);
    }
    SUBCASE("model and estimator lists parse") {
        write_file(cfg_path,
                   "models = 2D-iidG, 4D-CG\n"
                   "estimators = mi\n"
                   "gmi_means = both\n"
                   "split_ratio = 0.25\n"
                   "split_seed = 99\n"
                   "batches = 2\n");
        const RunConfig cfg = load_config(cfg_path);
        REQUIRE(cfg.models.size() == 2);
        CHECK(cfg.models[1] == ModelKind::parse("4D-CG"));
        CHECK(cfg.estimate_mi);
        CHECK_FALSE(cfg.estimate_gmi);
        CHECK(cfg.gmi_means == "both");
        CHECK(cfg.split_ratio == 0.25);
        CHECK(cfg.split_seed == 99);
        CHECK(cfg.batches == 2);
    }
}

TEST_CASE("results csv carries the config echo and one row per estimate") {
    std::vector<ResultRow> rows(2);
    rows[0] = {"awgn snr=12 n=100 seed=1", "2D-iidG", "MI", "static", 50, 50, 6.5, 0.01, 1};
    rows[1] = {"awgn snr=12 n=100 seed=1", "4D-CG", "MI", "adaptive", 50, 50, 6.75, 0.02, 1};
    const std::vector<std::string> echo = {"split_ratio=0.5", "batches=4"};
    const std::string csv = results_to_csv(rows, echo);

    CHECK(csv.find("# airkit results v1\n") == 0);
    CHECK(csv.find("# split_ratio=0.5\n") != std::string::npos);
    CHECK(csv.find("scenario,model,estimator,mean_mode,n_train,n_eval,rate_bit_per_4d,stderr,seed\n") !=
          std::string::npos);
    CHECK(csv.find("awgn snr=12 n=100 seed=1,2D-iidG,MI,static,50,50,6.5,0.01,1\n") !=
          std::string::npos);
    CHECK(csv.find("4D-CG,MI,adaptive") != std::string::npos);
    CHECK(results_to_csv(rows, echo) == csv);
}

TEST_CASE("constellation names parse strictly") {
    CHECK(constellation_from_name("16QAM").size_2d() == 16);
    CHECK(constellation_from_name("64QAM").size_2d() == 64);
    CHECK(constellation_from_name("QPSK").size_2d() == 4);
    CHECK_THROWS_AS(constellation_from_name("17QAM"), std::exception);
    CHECK_THROWS_AS(constellation_from_name("QAM"), std::runtime_error);
    CHECK_THROWS_AS(constellation_from_name("psk8"), std::runtime_error);
}
