#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cryptoscope/cli.hpp"
#include "support.hpp"

using namespace cryptoscope;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "cryptoscope");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string line_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (line.starts_with(key + ": ")) return line.substr(key.size() + 2);
  return {};
}

}  // namespace

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing_support::TempDir;
    const auto r = run({"corpus", "generate", "--out", corpus(), "--seed", "7", "--variants-per-program", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    fingerprint_ = new std::string(line_value(r.out, "fingerprint"));
  }
  static void TearDownTestSuite() {
    delete fingerprint_;
    delete dir_;
  }
  static std::string corpus() { return (*dir_ / "corpus").string(); }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static std::string dataset(const std::vector<std::string>& flags, const std::string& name) {
    std::vector<std::string> args{"features", "extract", "--corpus", corpus(), "--out", path(name)};
    args.insert(args.end(), flags.begin(), flags.end());
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  static testing_support::TempDir* dir_;
  static std::string* fingerprint_;
};

testing_support::TempDir* CliTest::dir_ = nullptr;
std::string* CliTest::fingerprint_ = nullptr;

TEST(CliUsage, BadInvocationsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"corpus", "generate"}).code, 2);
  EXPECT_EQ(run({"train", "--dataset"}).code, 2);
  EXPECT_EQ(run({"help-me"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, GenerationIsReproducible) {
  testing_support::TempDir other;
  const auto r = run({"corpus", "generate", "--out", (other / "c").string(), "--seed", "7", "--variants-per-program", "3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(line_value(r.out, "fingerprint"), *fingerprint_);
  EXPECT_EQ(line_value(r.out, "traces"), "39");
  EXPECT_EQ(read_file(other / "c" / "corpus.manifest.json"), read_file(fs::path(corpus()) / "corpus.manifest.json"));
  for (const auto& e : fs::directory_iterator(corpus()))
    EXPECT_EQ(read_file(e.path()), read_file(other / "c" / e.path().filename())) << e.path().filename();

  const auto r2 = run({"corpus", "generate", "--out", (other / "d").string(), "--seed", "8", "--variants-per-program", "3"});
  EXPECT_NE(line_value(r2.out, "fingerprint"), *fingerprint_);
}

TEST_F(CliTest, InstructionBasisIsWiderThanCategory) {
  const auto cat = parse_dataset(read_file(dataset({"--basis", "category", "--loops", "off"}, "cat.jsonl")));
  const auto ins = parse_dataset(read_file(dataset({"--basis", "instruction", "--loops", "off"}, "ins.jsonl")));
  EXPECT_EQ(cat.space.dimension(), kCategoryCount);
  EXPECT_GT(ins.space.dimension(), cat.space.dimension());
  EXPECT_EQ(cat.examples.size(), 39u);
  EXPECT_EQ(cat.manifest_hash, *fingerprint_);
}

TEST_F(CliTest, CorruptTraceIsCountedAndSkipped) {
  testing_support::TempDir copy;
  fs::copy(corpus(), copy.path(), fs::copy_options::recursive);
  write_file_atomic(copy / "md5__v01.trace", "this is not a trace\n");
  const auto r = run({"features", "extract", "--corpus", copy.path().string(), "--out", (copy / "ds.jsonl").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_value(r.out, "total failures"), "1");
  EXPECT_EQ(line_value(r.out, "traces processed"), "38");
  EXPECT_NE(r.out.find("md5__v01.trace"), std::string::npos);
}

TEST_F(CliTest, TrainPredictRoundTrip) {
  const auto ds = dataset({}, "default.jsonl");
  const auto model = path("detect-tree.model.json");
  auto r = run({"train", "--dataset", ds, "--task", "detect", "--model", "tree", "--out", model});
  ASSERT_EQ(r.code, 0) << r.err;

  r = run({"predict", "--model", model, "--trace", (fs::path(corpus()) / "aes128_cbc__v02.trace").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.starts_with("has_crypto=true\n")) << r.out;

  r = run({"predict", "--model", model, "--dataset", ds});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_value(r.out, "accuracy"), "1");

  const auto first = read_file(model);
  ASSERT_EQ(run({"train", "--dataset", ds, "--task", "detect", "--model", "tree", "--out", model}).code, 0);
  EXPECT_EQ(read_file(model), first);
}

TEST_F(CliTest, MismatchedFeatureFlagsExitThree) {
  const auto ds = dataset({"--basis", "category"}, "cat-default.jsonl");
  const auto model = path("detect-gnb.model.json");
  ASSERT_EQ(run({"train", "--dataset", ds, "--task", "detect", "--model", "gnb", "--out", model}).code, 0);
  const auto trace = (fs::path(corpus()) / "rc4__v00.trace").string();
  auto r = run({"predict", "--model", model, "--trace", trace, "--basis", "instruction"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("category"), std::string::npos);
  EXPECT_EQ(run({"predict", "--model", model, "--trace", trace, "--basis", "category"}).code, 0);
  EXPECT_EQ(run({"predict", "--model", model, "--trace", trace, "--loops", "off"}).code, 3);

  const auto ins = dataset({"--basis", "instruction"}, "ins-default.jsonl");
  EXPECT_EQ(run({"predict", "--model", model, "--dataset", ins}).code, 3);
}

TEST_F(CliTest, AlgorithmModelRejectsPlainData) {
  const auto ds = dataset({}, "algo.jsonl");
  const auto model = path("algo.model.json");
  ASSERT_EQ(run({"train", "--dataset", ds, "--task", "algo", "--model", "svm", "--out", model}).code, 0);
  EXPECT_EQ(run({"predict", "--model", model, "--dataset", ds}).code, 3);
  EXPECT_EQ(run({"predict", "--model", model, "--trace", (fs::path(corpus()) / "bubble_sort__v00.trace").string()}).code, 3);
  const auto r = run({"predict", "--model", model, "--trace", (fs::path(corpus()) / "sha1__v01.trace").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.starts_with("algorithm=")) << r.out;
}

TEST_F(CliTest, MissingInputsExit) {
  EXPECT_EQ(run({"predict", "--model", path("nope.json"), "--trace", path("nope.trace")}).code, 2);
  write_file_atomic(path("broken.model.json"), "{\"format_version\": 1}");
  const auto trace = (fs::path(corpus()) / "rc4__v00.trace").string();
  EXPECT_EQ(run({"predict", "--model", path("broken.model.json"), "--trace", trace}).code, 3);
}

TEST_F(CliTest, CrossvalAndClusterOutputs) {
  const auto ds = dataset({}, "cv.jsonl");
  auto r = run({"crossval", "--dataset", ds, "--task", "type", "--model", "gnb", "--folds", "3", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cv = nlohmann::json::parse(r.out);
  EXPECT_EQ(cv.at("fold_assignment"), "stratified");
  EXPECT_EQ(cv.at("folds"), 3);
  EXPECT_EQ(cv.at("seed"), 5);
  EXPECT_EQ(run({"crossval", "--dataset", ds, "--task", "type", "--model", "gnb", "--folds", "3", "--seed", "5"}).out,
            r.out);

  const auto km = path("km.model.json");
  r = run({"cluster", "--dataset", ds, "--task", "algo", "--k", "6", "--seed", "3", "--save-model", km});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cl = nlohmann::json::parse(r.out);
  for (const char* key : {"homogeneity", "completeness", "v_score", "inertia"}) EXPECT_TRUE(cl.contains(key)) << key;
  EXPECT_EQ(cl.at("k"), 6);
  EXPECT_EQ(cl.at("rng"), "mt19937_64");
  const auto mf = parse_model(read_file(km));
  EXPECT_EQ(std::get<learn::KMeansModel>(mf.model).centroids.rows(), 6u);
  EXPECT_EQ(run({"predict", "--model", km, "--dataset", ds}).code, 3);
}

TEST_F(CliTest, ReportIsByteStable) {
  const auto a = path("r1.json"), b = path("r2.json");
  ASSERT_EQ(run({"report", "--corpus", corpus(), "--out", a, "--seed", "42"}).code, 0);
  ASSERT_EQ(run({"report", "--corpus", corpus(), "--out", b, "--seed", "42"}).code, 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(nlohmann::json::parse(read_file(a)).at("corpus_fingerprint"), *fingerprint_);
}
