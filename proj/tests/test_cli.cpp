#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
    if (const char* env = std::getenv("FRACTAL_BIN")) return env;
#ifdef FRACTAL_TEST_BIN
    return FRACTAL_TEST_BIN;
#else
    return "./fractal";
#endif
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const fs::path& workdir) {
    const fs::path out_file = workdir / "cli-output.txt";
    const std::string command =
        "cd " + workdir.string() + " && " + cli_binary() + " " + args + " > " +
        out_file.string() + " 2>&1";
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fractal-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

}  // namespace

TEST_CASE("synth jsonl output is deterministic per seed") {
    TempDir tmp;
    const std::string args =
        "synth --kind fgn --hurst 0.8 --count 3 --length 512 --seed 9 --format jsonl --output ";
    auto first = run_cli(args + "a.jsonl", tmp.path);
    REQUIRE(first.exit_code == 0);
    auto second = run_cli(args + "b.jsonl", tmp.path);
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(tmp.path / "a.jsonl") == slurp(tmp.path / "b.jsonl"));

    const std::string other =
        "synth --kind fgn --hurst 0.8 --count 3 --length 512 --seed 10 --format jsonl "
        "--output c.jsonl";
    REQUIRE(run_cli(other, tmp.path).exit_code == 0);
    CHECK(slurp(tmp.path / "a.jsonl") != slurp(tmp.path / "c.jsonl"));
}

TEST_CASE("synth csv writes one header-led file per path") {
    TempDir tmp;
    const auto result = run_cli(
        "synth --kind white_noise --count 2 --length 16 --seed 4 --format csv --output series",
        tmp.path);
    REQUIRE(result.exit_code == 0);
    const auto file = tmp.path / "series" / "white_noise_0000.csv";
    REQUIRE(fs::exists(file));
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 16);
    CHECK(fs::exists(tmp.path / "series" / "white_noise_0001.csv"));
}

TEST_CASE("synth rejects invalid parameters with the usage exit code") {
    TempDir tmp;
    CHECK(run_cli("synth --kind ar1 --phi 1.2 --count 1 --length 64", tmp.path).exit_code == 64);
    CHECK(run_cli("synth --kind nope --count 1 --length 64", tmp.path).exit_code == 64);
    CHECK(run_cli("synth --kind white_noise --length 2 --count 1 --output w", tmp.path)
              .exit_code == 0);  // minimal valid length
}

TEST_CASE("analyze recovers the generator exponent end to end") {
    TempDir tmp;
    REQUIRE(run_cli("synth --kind fgn --hurst 0.7 --count 12 --length 4200 --seed 5 "
                    "--format jsonl --output corpus.jsonl",
                    tmp.path)
                .exit_code == 0);

    const auto result = run_cli(
        "analyze --input corpus.jsonl --output out --bootstrap 100 --min-domain-docs 10 "
        "--seed 3 --workers 2",
        tmp.path);
    REQUIRE(result.exit_code == 0);

    json report;
    std::ifstream in(tmp.path / "out" / "report.json");
    REQUIRE(in.is_open());
    in >> report;

    CHECK(report["domains"].size() == 1);
    const auto& domain = report["domains"][0];
    CHECK(domain["domain"] == "synthetic-fgn");
    CHECK(domain["n_documents"] == 12);
    const double h = domain["estimates"]["H"]["value"].get<double>();
    CHECK(std::abs(h - 0.7) < 0.05);
    CHECK(domain["estimates"]["H"]["margin"].get<double>() > 0.0);
    const double s = domain["estimates"]["S"]["value"].get<double>();
    const double d = domain["estimates"]["D"]["value"].get<double>();
    CHECK(d == 2.0 - s);
    CHECK(report["medians"]["H"].get<double>() == h);
    CHECK(fs::exists(tmp.path / "out" / "selfsim_synthetic-fgn.csv"));
    CHECK(fs::exists(tmp.path / "out" / "pacf_synthetic-fgn.csv"));
}

TEST_CASE("analyze merges several corpus files into per-domain reports") {
    TempDir tmp;
    REQUIRE(run_cli("synth --kind fgn --hurst 0.75 --count 4 --length 700 --seed 1 "
                    "--format jsonl --output f1.jsonl --domain bursty",
                    tmp.path)
                .exit_code == 0);
    REQUIRE(run_cli("synth --kind white_noise --count 4 --length 700 --seed 2 "
                    "--format jsonl --output f2.jsonl --domain flat",
                    tmp.path)
                .exit_code == 0);
    const auto result = run_cli(
        "analyze --input f1.jsonl --input f2.jsonl --output out --min-doc-tokens 650 "
        "--keep-tokens 600 --trim-tokens 10 --tau-max 128 --rs-max 128",
        tmp.path);
    REQUIRE(result.exit_code == 0);

    json report;
    std::ifstream in(tmp.path / "out" / "report.json");
    in >> report;
    REQUIRE(report["domains"].size() == 2);
    CHECK(report["domains"][0]["domain"] == "bursty");
    CHECK(report["domains"][1]["domain"] == "flat");
    // Too few documents for margins, but the warning says so.
    CHECK(report["domains"][0]["estimates"]["H"]["margin"].is_null());
    CHECK(report["medians"]["basis"] == "all_domains");
}

TEST_CASE("analyze exits 2 when nothing passes the filters") {
    TempDir tmp;
    REQUIRE(run_cli("synth --kind white_noise --count 3 --length 256 --seed 1 "
                    "--format jsonl --output short.jsonl",
                    tmp.path)
                .exit_code == 0);
    // Default min-doc-tokens (4096) rejects every 256-token document.
    const auto result = run_cli("analyze --input short.jsonl --output out", tmp.path);
    CHECK(result.exit_code == 2);

    std::ofstream(tmp.path / "empty.jsonl").close();
    CHECK(run_cli("analyze --input empty.jsonl --output out2", tmp.path).exit_code == 2);

    CHECK(run_cli("analyze --input missing.jsonl --output out3", tmp.path).exit_code == 2);
}

TEST_CASE("analyze usage errors exit 64") {
    TempDir tmp;
    REQUIRE(run_cli("synth --kind white_noise --count 2 --length 700 --seed 1 "
                    "--format jsonl --output c.jsonl",
                    tmp.path)
                .exit_code == 0);
    // keep-tokens below the tau window is a configuration contradiction
    const auto result = run_cli(
        "analyze --input c.jsonl --output out --min-doc-tokens 600 --keep-tokens 256 "
        "--trim-tokens 10",
        tmp.path);
    CHECK(result.exit_code == 64);
}

TEST_CASE("validate is reproducible, and the failure hook fails") {
    TempDir tmp;
    const std::string args = "validate --seed 11 --paths 4 --length 4096 --workers 2";
    const auto a = run_cli(args, tmp.path);
    const auto b = run_cli(args, tmp.path);
    CHECK(a.output == b.output);
    CHECK(a.output.find("hurst_rs fgn H=0.70") != std::string::npos);

    const auto hook = run_cli(args + " --inject-failure", tmp.path);
    CHECK(hook.exit_code == 1);
    CHECK(hook.output.find("FAIL") != std::string::npos);
    CHECK(hook.output.find("injected failure") != std::string::npos);
}

TEST_CASE("analyze maps estimator failures to exit 3") {
    TempDir tmp;
    REQUIRE(run_cli("synth --kind fgn --hurst 0.6 --count 3 --length 700 --seed 2 "
                    "--format jsonl --output c.jsonl",
                    tmp.path)
                .exit_code == 0);
    // An epsilon no increment can ever land inside starves the event counts.
    const auto result = run_cli(
        "analyze --input c.jsonl --output out --min-doc-tokens 650 --keep-tokens 600 "
        "--trim-tokens 10 --tau-max 128 --rs-max 128 --epsilon 1e-300",
        tmp.path);
    CHECK(result.exit_code == 3);
}

TEST_CASE("rs literal-prefix diagnostic flag is accepted and recorded") {
    TempDir tmp;
    REQUIRE(run_cli("synth --kind fgn --hurst 0.6 --count 3 --length 700 --seed 2 "
                    "--format jsonl --output c.jsonl",
                    tmp.path)
                .exit_code == 0);
    const auto result = run_cli(
        "analyze --input c.jsonl --output out --min-doc-tokens 650 --keep-tokens 600 "
        "--trim-tokens 10 --tau-max 128 --rs-max 128 --rs-literal-prefix",
        tmp.path);
    REQUIRE(result.exit_code == 0);
    json report;
    std::ifstream in(tmp.path / "out" / "report.json");
    in >> report;
    CHECK(report["config"]["pooling"]["rs_mean_adjust"] == "literal_prefix");
}

TEST_CASE("predict reproduces the pinned reference cells") {
    TempDir tmp;
    const auto result =
        run_cli("predict --target \"0S BBH Direct\" --predictor bpb", tmp.path);
    REQUIRE(result.exit_code == 0);
    CHECK(result.output.find("0.78") != std::string::npos);

    const auto hb = run_cli("predict --target \"3S BBH CoT\" --predictor hb", tmp.path);
    REQUIRE(hb.exit_code == 0);
    CHECK(hb.output.find("0.96") != std::string::npos);
    CHECK(hb.output.find("pearson(median H, BPB)") != std::string::npos);
}

TEST_CASE("predict lists available metrics on unknown targets") {
    TempDir tmp;
    const auto result = run_cli("predict --target \"No Such Benchmark\"", tmp.path);
    CHECK(result.exit_code == 64);
    CHECK(result.output.find("available metrics") != std::string::npos);
    CHECK(result.output.find("3S BBH CoT") != std::string::npos);
}

TEST_CASE("score drives the corpus schema end to end") {
    httplib::Server server;
    server.Post("/v1/completions", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        const std::string prompt = body.at("prompt").get<std::string>();
        json tokens = json::array();
        json logprobs = json::array();
        for (std::size_t i = 0; i < prompt.size(); ++i) {
            tokens.push_back(std::string(1, prompt[i]));
            logprobs.push_back(i == 0 ? json(nullptr) : json(-0.5 - 0.1 * static_cast<double>(i)));
        }
        json response;
        response["choices"] = json::array();
        response["choices"].push_back(
            {{"logprobs", {{"tokens", tokens}, {"token_logprobs", logprobs}}}});
        res.set_content(response.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir tmp;
    {
        std::ofstream in(tmp.path / "texts.jsonl");
        in << R"({"doc_id":"t1","domain":"dom","text":"hello"})" << "\n";
        in << R"({"doc_id":"t2","domain":"dom","text":"worlds"})" << "\n";
    }
    const auto result = run_cli("score --input texts.jsonl --output scored.jsonl --model m "
                                "--endpoint http://127.0.0.1:" + std::to_string(port) +
                                    "/v1/completions --workers 2",
                                tmp.path);
    server.stop();
    listener.join();
    REQUIRE(result.exit_code == 0);

    std::ifstream scored(tmp.path / "scored.jsonl");
    std::string line;
    std::size_t docs = 0;
    while (std::getline(scored, line)) {
        const auto obj = json::parse(line);
        CHECK(obj["domain"] == "dom");
        CHECK(obj["logprob_base"] == "natural");
        // First token is dropped (null logprob), the rest survive.
        CHECK(obj["tokens"].size() ==
              (obj["doc_id"] == "t1" ? std::size_t{4} : std::size_t{5}));
        ++docs;
    }
    CHECK(docs == 2);
}

TEST_CASE("unknown flags exit with the usage code") {
    TempDir tmp;
    CHECK(run_cli("analyze --no-such-flag", tmp.path).exit_code == 64);
    CHECK(run_cli("", tmp.path).exit_code == 64);
}
