#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rulens/cli.hpp"

namespace fs = std::filesystem;
using namespace rulens;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("rulens_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        iris_ = std::string(RULENS_TEST_DATA) + "/iris.csv";
        pima_ = std::string(RULENS_TEST_DATA) + "/pima.csv";
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "rulens");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream sink;
        auto* old_err = std::cerr.rdbuf(sink.rdbuf());
        auto* old_out = std::cout.rdbuf(sink.rdbuf());
        const int code = cli::run(static_cast<int>(argv.size()), argv.data());
        std::cerr.rdbuf(old_err);
        std::cout.rdbuf(old_out);
        log_ = sink.str();
        return code;
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
    std::string iris_, pima_, log_;
};

const std::vector<std::string> kQuick{"--max-rules", "40", "--max-iter", "100"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run({}), cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
    EXPECT_EQ(run({"train", "--data", iris_, "--label-col", "class"}), cli::kUsage);  // --out missing
    EXPECT_EQ(run({"--help"}), cli::kOk);
    EXPECT_EQ(run({"train", "--data", path("missing.csv"), "--label-col", "y", "--out", path("m.json")}), cli::kData);
    EXPECT_EQ(run(with({"train", "--data", iris_, "--label-col", "class", "--out", path("m.json"), "--solver", "lbfgs"}, {})), cli::kUsage);
    EXPECT_EQ(run({"train", "--data", iris_, "--label-col", "class", "--out", path("m.json"), "--tau", "0.5", "--solver", "cdnet"}), cli::kUsage);
    EXPECT_EQ(run({"train", "--data", iris_, "--label-col", "nope", "--out", path("m.json")}), cli::kData);
    EXPECT_EQ(run({"predict", "--data", iris_, "--label-col", "class", "--model", path("absent.json")}), cli::kData);

    std::ofstream(path("bad.csv")) << "a,y\n1,x\nfoo,y\n";
    EXPECT_EQ(run({"train", "--data", path("bad.csv"), "--label-col", "y", "--out", path("m.json")}), cli::kData);
    EXPECT_NE(log_.find("row 2"), std::string::npos) << log_;
}

TEST_F(Cli, TrainPredictEvaluateRank) {
    ASSERT_EQ(run(with({"train", "--data", iris_, "--label-col", "class", "--out", path("m.json"), "--report", path("r.csv")}, kQuick)), cli::kOk)
        << log_;
    EXPECT_NE(log_.find("# rulens train: "), std::string::npos);
    EXPECT_EQ(slurp(path("r.csv")).rfind("class,step,iteration,objective,risk,nonzeros\n", 0), 0u);

    ASSERT_EQ(run({"predict", "--data", iris_, "--label-col", "class", "--model", path("m.json"), "--out", path("p.csv")}), cli::kOk) << log_;
    const auto pred = slurp(path("p.csv"));
    EXPECT_EQ(pred.rfind("row_index,score_setosa,score_versicolor,score_virginica,predicted_label\n", 0), 0u);
    EXPECT_EQ(std::count(pred.begin(), pred.end(), '\n'), 151);

    // the label column is optional at prediction time
    std::ifstream in(iris_);
    std::ofstream unl(path("unlabeled.csv"));
    for (std::string line; std::getline(in, line);) unl << line.substr(0, line.rfind(',')) << "\n";
    unl.close();
    ASSERT_EQ(run({"predict", "--data", path("unlabeled.csv"), "--model", path("m.json"), "--out", path("p2.csv")}), cli::kOk)
        << log_;
    EXPECT_EQ(slurp(path("p2.csv")), pred);

    ASSERT_EQ(run({"evaluate", "--data", iris_, "--label-col", "class", "--model", path("m.json"), "--out", path("e.csv")}), cli::kOk) << log_;
    const auto eval = slurp(path("e.csv"));
    EXPECT_EQ(eval.rfind("class,error,fp_rate,fn_rate,nonzeros\nall,", 0), 0u);
    EXPECT_NE(eval.find("\nvirginica,"), std::string::npos);

    ASSERT_EQ(run({"rank", "--model", path("m.json"), "--top", "3", "--out", path("rank.txt")}), cli::kOk) << log_;
    const auto rank = slurp(path("rank.txt"));
    EXPECT_EQ(rank.rfind("class setosa\nrank  importance  rule\n", 0), 0u);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
    std::ofstream(path("c.toml")) << "[train]\nsolver = \"cdnet\"\nlambda-min = 0.05\nmax-rules = 30\n";
    ASSERT_EQ(run({"train", "--data", pima_, "--label-col", "class", "--out", path("a.json"), "--config", path("c.toml")}), cli::kOk) << log_;
    EXPECT_NE(slurp(path("a.json")).find("\"name\": \"cdnet\""), std::string::npos);
    EXPECT_NE(log_.find("lambda_min=0.05"), std::string::npos) << log_;

    ASSERT_EQ(run({"--config", path("c.toml"), "train", "--data", pima_, "--label-col", "class", "--out", path("b.json"), "--solver", "fpc",
                   "--mu-max", "0.5"}),
              cli::kUsage)
        << "lambda-min from the config does not apply to fpc";
    std::ofstream(path("d.toml")) << "[train]\nsolver = \"cdnet\"\nmax-rules = 30\n";
    ASSERT_EQ(run({"--config", path("d.toml"), "train", "--data", pima_, "--label-col", "class", "--out", path("b.json"), "--solver", "fpc"}),
              cli::kOk)
        << log_;
    EXPECT_NE(slurp(path("b.json")).find("\"name\": \"fpc\""), std::string::npos);

    ASSERT_EQ(run(with({"train", "--data", pima_, "--label-col", "class", "--out", path("c.json")}, kQuick)), cli::kOk) << log_;
    EXPECT_NE(slurp(path("c.json")).find("\"name\": \"pathbuild\""), std::string::npos);
    EXPECT_EQ(run({"train", "--data", pima_, "--label-col", "class", "--out", path("c.json"), "--config", path("none.toml")}), cli::kUsage);
}

TEST_F(Cli, CrossValidationIsReproducible) {
    const auto args = with({"cv", "--data", pima_, "--label-col", "class", "--reps", "2", "--seed", "4"}, kQuick);
    ASSERT_EQ(run(with(args, {"--out", path("a.csv")})), cli::kOk) << log_;
    ASSERT_EQ(run(with(args, {"--out", path("b.csv")})), cli::kOk) << log_;
    const auto a = slurp(path("a.csv"));
    EXPECT_EQ(a, slurp(path("b.csv")));
    EXPECT_EQ(a.rfind("repetition,fold,error,fp_rate,fn_rate,nonzeros\n", 0), 0u);
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 7);
}

TEST_F(Cli, SweepAndSelect) {
    ASSERT_EQ(run(with({"sweep", "--data", pima_, "--label-col", "class", "--reps", "1", "--solver", "cdnet", "--param", "lambda-min",
                        "--param-grid", "0.1, 0.01", "--out", path("s.csv")},
                       {"--max-rules", "30"})),
              cli::kOk)
        << log_;
    const auto s = slurp(path("s.csv"));
    EXPECT_EQ(s.rfind("lambda_min,mean_error,", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
    EXPECT_EQ(run({"sweep", "--data", pima_, "--label-col", "class", "--param", "lambda-min", "--param-grid", "0.1,x", "--solver", "cdnet"}),
              cli::kUsage);
    EXPECT_EQ(run({"sweep", "--data", pima_, "--label-col", "class", "--param", "sigma", "--param-grid", "1", "--solver", "cdnet"}),
              cli::kUsage);

    ASSERT_EQ(run({"select-attrs", "--data", pima_, "--label-col", "class", "--reps", "3", "--min-votes", "2", "--max-rules", "30",
                   "--out", path("sel.csv"), "--tally-out", path("t.csv")}),
              cli::kOk)
        << log_;
    EXPECT_EQ(slurp(path("sel.csv")).rfind("index,attribute\n", 0), 0u);
    EXPECT_EQ(slurp(path("t.csv")).rfind("repetition,class,term,votes,rule\n", 0), 0u);
}
