// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "cryptoscope/cli.hpp"
#include "cryptoscope/dataset.hpp"
#include "cryptoscope/eval/cv.hpp"
#include "cryptoscope/eval/metrics.hpp"
#include "cryptoscope/features.hpp"
#include "cryptoscope/learn/kmeans.hpp"
#include "cryptoscope/learn/naive_bayes.hpp"
#include "cryptoscope/learn/svm.hpp"
#include "cryptoscope/learn/tree.hpp"
#include "cryptoscope/programs/aes.hpp"
#include "cryptoscope/programs/des.hpp"
#include "cryptoscope/programs/rc4.hpp"
#include "cryptoscope/programs/rsa.hpp"
#include "cryptoscope/tracegen.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cryptoscope;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

int failures = 0;

void report(int id, const std::string& title, Outcome o) {
  if (!o.pass) ++failures;
  std::printf("criterion %d [%s] %s: %s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

Outcome crypto_correctness() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto rep = self_test_vectors();
  std::size_t ok = 0;
  for (const auto& c : rep.checks) {
    ok += c.passed;
    o.require(c.passed, c.name + " mismatch");
  }
  o.note(std::to_string(ok) + "/" + std::to_string(rep.checks.size()) + " published vectors");

  testing_support::Bench b;
  Rng rng(2024);
  int aes = 0, rc4 = 0, des = 0, rsa = 0;
  for (int i = 0; i < 100; ++i) {
    const auto key = random_bytes(rng, 16);
    const auto pt = random_bytes(rng, 16 * (1 + uniform_below(rng, 4)));
    programs::AesBlock iv;
    std::ranges::copy(random_bytes(rng, 16), iv.begin());
    const auto ks = programs::aes128_expand(b.m, std::span<const std::uint8_t, 16>(key.data(), 16));
    aes += programs::aes128_cbc_decrypt(b.m, ks, iv, programs::aes128_cbc_encrypt(b.m, ks, iv, pt)) == pt;

    auto e = programs::rc4_init(b.m, key), d = programs::rc4_init(b.m, key);
    rc4 += programs::rc4_apply(b.m, d, programs::rc4_apply(b.m, e, pt)) == pt;

    const auto dk = programs::des3_key_schedule(b.m, rng(), rng(), rng());
    const std::uint64_t div = rng();
    const auto mode = static_cast<BlockMode>(i % 3);
    des += programs::des3_crypt(b.m, dk, div, programs::des3_crypt(b.m, dk, div, pt, mode, false), mode, true) == pt;

    programs::Limbs m{};
    for (auto& w : m) w = static_cast<std::uint32_t>(rng());
    m[programs::kRsaLimbs - 1] &= 0x7fffffffu;
    rsa += programs::rsa_decrypt(b.m, programs::rsa_encrypt(b.m, m)) == m;
  }
  o.require(aes == 100 && rc4 == 100 && des == 100 && rsa == 100, "decrypt(encrypt(x)) != x");
  o.note("round trips aes " + std::to_string(aes) + " rc4 " + std::to_string(rc4) + " 3des " + std::to_string(des) +
         " rsa " + std::to_string(rsa) + " of 100");
  const double secs = since(t0);
  o.require(secs < 10, "took " + num(secs) + " s");
  o.note(num(secs, 2) + " s");
  return o;
}

Outcome feature_laws() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(4242);
  std::vector<Trace> traces;
  for (int i = 0; i < 1000; ++i) traces.push_back(testing_support::random_trace(rng, 1 + uniform_below(rng, 500)));
  std::size_t sum_bad = 0, count_bad = 0, order_bad = 0;
  for (auto basis : {Basis::INSTRUCTION, Basis::CATEGORY}) {
    const auto sc = fit_space(traces, {basis, Representation::COUNT, true, 2});
    const auto sp = fit_space(traces, {basis, Representation::PROPORTION, true, 2});
    for (const auto& t : traces) {
      const auto c = extract(t, sc), p = extract(t, sp);
      const double n = static_cast<double>(t.events.size());
      double sum = 0;
      for (std::size_t i = 0; i < sp.base_dimension(); ++i) {
        sum += p[i];
        if (std::abs(p[i] * n - c[i]) > 1e-9) ++count_bad;
      }
      if (std::abs(sum - 1.0) > 1e-9) ++sum_bad;
      auto shuffled = t;
      shuffle(shuffled.events.begin(), shuffled.events.end(), rng);
      for (std::uint32_t i = 0; i < shuffled.events.size(); ++i) shuffled.events[i].seq = i;
      const auto cs = extract(shuffled, sc), ps = extract(shuffled, sp);
      for (std::size_t i = 0; i < sc.base_dimension(); ++i)
        if (cs[i] != c[i] || ps[i] != p[i]) {
          ++order_bad;
          break;
        }
    }
  }
  o.require(sum_bad == 0, std::to_string(sum_bad) + " proportion sums off");
  o.require(count_bad == 0, std::to_string(count_bad) + " count/length mismatches");
  o.require(order_bad == 0, std::to_string(order_bad) + " order-dependent vectors");
  const double secs = since(t0);
  o.require(secs < 60, "took " + num(secs) + " s");
  o.note("1000 traces x 2 bases, " + num(secs, 2) + " s");
  return o;
}

Outcome learner_oracles() {
  using learn::Matrix;
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(77);

  double gnb_err = 0, mnb_err = 0;
  for (int round = 0; round < 200; ++round) {
    Matrix x(0, 3);
    for (int i = 0; i < 4; ++i)
      x.push_row(std::vector<double>{static_cast<double>(uniform_below(rng, 6)), static_cast<double>(uniform_below(rng, 6)),
                                     static_cast<double>(uniform_below(rng, 6))});
    const std::vector<int> y{0, 1, 0, 1};
    const std::vector<double> q{static_cast<double>(uniform_below(rng, 8)), static_cast<double>(uniform_below(rng, 8)),
                                static_cast<double>(uniform_below(rng, 8))};
    // GNB data keeps each class spread by at least 1 per feature. Tied or
    // nearly tied points push log-scores toward 1e8 and beyond, where the
    // spacing of doubles alone exceeds 1e-9.
    Matrix xc(4, 3);
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t j = 0; j < 3; ++j) {
        xc(c, j) = uniform01(rng) * 6;
        xc(c + 2, j) = xc(c, j) + 1 + uniform01(rng) * 3;
      }
    const std::vector<double> qc{uniform01(rng) * 8, uniform01(rng) * 8, uniform01(rng) * 8};
    const auto g = learn::gnb_predict(learn::gnb_train(xc, y), qc).scores;
    const auto go = oracle::gnb_log_posterior(xc, y, 2, qc);
    const auto m = learn::mnb_predict(learn::mnb_train(x, y, 1.0), q).scores;
    const auto mo = oracle::mnb_log_score(x, y, 2, 1.0, q);
    for (int c = 0; c < 2; ++c) {
      gnb_err = std::max(gnb_err, std::abs(g[c] - go[c]));
      mnb_err = std::max(mnb_err, std::abs(m[c] - mo[c]));
    }
  }
  o.require(gnb_err <= 1e-9, "GNB off by " + sci(gnb_err));
  o.require(mnb_err <= 1e-9, "MNB off by " + sci(mnb_err));

  std::size_t cart_bad = 0;
  for (int round = 0; round < 50; ++round) {
    Matrix x(0, 2);
    std::vector<int> y;
    for (int i = 0; i < 12; ++i) {
      x.push_row(std::vector<double>{static_cast<double>(uniform_below(rng, 10)), static_cast<double>(uniform_below(rng, 10))});
      y.push_back(static_cast<int>(uniform_below(rng, 3)));
    }
    const auto t = learn::tree_train(x, y, 3);
    oracle::Cart cart;
    std::vector<std::size_t> all(12);
    std::iota(all.begin(), all.end(), 0);
    cart.grow(x, y, all, 3);
    for (double a = -0.5; a <= 10; a += 0.5)
      for (double b = -0.5; b <= 10; b += 0.5) cart_bad += learn::tree_predict(t, std::vector<double>{a, b}) != cart.predict({a, b});
  }
  o.require(cart_bad == 0, std::to_string(cart_bad) + " CART disagreements");

  Matrix kx(0, 2);
  for (int i = 0; i < 200; ++i) kx.push_row(std::vector<double>{uniform01(rng) * 10, uniform01(rng) * 10});
  const auto km = learn::kmeans_fit(kx, 5, 42);
  std::size_t km_bad = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> q{uniform01(rng) * 12 - 1, uniform01(rng) * 12 - 1};
    km_bad += learn::kmeans_assign(km, q) != oracle::nearest(km.centroids, q);
  }
  o.require(km_bad == 0, std::to_string(km_bad) + " k-means assignment disagreements");

  Matrix sx(0, 2);
  std::vector<int> sy;
  for (int i = 0; i < 20; ++i) {
    const int c = i % 2 ? 1 : -1;
    sx.push_row(std::vector<double>{c * 3.0 + uniform01(rng) * 2 - 1, c * 2.0 + uniform01(rng) * 2 - 1});
    sy.push_back(c);
  }
  std::vector<double> alpha;
  const auto svm = learn::svm_train_binary(sx, sy, learn::KernelSpec{}, 1.0, {}, &alpha);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < sx.rows(); ++i) correct += (svm.decision(sx.row(i)) > 0 ? 1 : -1) == sy[i];
  bool box = true;
  for (double a : alpha) box = box && a >= 0 && a <= 1.0;
  o.require(correct == sx.rows(), "SVM training accuracy " + std::to_string(correct) + "/20");
  o.require(box, "SVM alpha outside [0, C]");

  const double secs = since(t0);
  o.require(secs < 30, "took " + num(secs) + " s");
  o.note("max |GNB-oracle| " + sci(gnb_err) + ", max |MNB-oracle| " + sci(mnb_err) + ", CART and k-means agree, SVM " +
         std::to_string(correct) + "/20, " + num(secs, 2) + " s");
  return o;
}

Outcome metrics_correctness() {
  using namespace eval;
  Outcome o;
  const auto same = [](double a, double b) { return std::abs(a - b) <= 1e-15; };

  const std::vector<int> perfect{0, 1, 2, 1};
  const auto p = classification_metrics(perfect, perfect);
  o.require(p.precision == 1 && p.recall == 1 && p.f1 == 1 && p.accuracy == 1, "perfect predictions");

  const auto b = classification_metrics(std::vector<int>{1, 1, 1, 0, 0, 0}, std::vector<int>{1, 1, 0, 1, 0, 0});
  o.require(same(b.per_class[1].precision, 2.0 / 3) && same(b.per_class[1].recall, 2.0 / 3) &&
                same(b.per_class[1].f1, 2.0 / 3),
            "binary 2/3 example");

  const auto c = classification_metrics(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 0, 0});
  o.require(same(c.per_class[0].precision, 0.5) && c.per_class[0].recall == 1 && c.per_class[1].precision == 0 &&
                c.per_class[1].recall == 0 && same(c.f1, 1.0 / 3),
            "constant predictor macro F1");

  const std::vector<int> lab{0, 0, 1, 1};
  const auto h1 = cluster_metrics(lab, std::vector<int>{0, 0, 1, 1});
  o.require(h1.homogeneity == 1 && h1.completeness == 1 && h1.v_score == 1, "perfect partition");
  const auto h2 = cluster_metrics(lab, std::vector<int>{0, 0, 0, 0});
  o.require(h2.homogeneity == 0 && h2.completeness == 1 && h2.v_score == 0, "single cluster");
  const auto h3 = cluster_metrics(lab, std::vector<int>{0, 1, 2, 3});
  o.require(h3.homogeneity == 1 && same(h3.completeness, 0.5) && same(h3.v_score, 2.0 / 3),
            "singleton clusters (h=1, c=1/2, v=2/3)");

  Rng rng(5150);
  std::size_t bad = 0;
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = 2 + uniform_below(rng, 60);
    const auto ka = 1 + uniform_below(rng, 6), kb = 1 + uniform_below(rng, 6);
    std::vector<int> a(n), k(n);
    for (auto& v : a) v = static_cast<int>(uniform_below(rng, ka));
    for (auto& v : k) v = static_cast<int>(uniform_below(rng, kb));
    const auto ak = cluster_metrics(a, k), ka_ = cluster_metrics(k, a);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> k2(n);
    for (std::size_t i = 0; i < n; ++i) k2[i] = perm[static_cast<std::size_t>(k[i])] * 7 + 3;
    const auto r = cluster_metrics(a, k2);
    const bool swap_ok = ak.homogeneity == ka_.completeness && ak.completeness == ka_.homogeneity;
    const bool relabel_ok = std::abs(r.homogeneity - ak.homogeneity) <= 1e-12 &&
                            std::abs(r.completeness - ak.completeness) <= 1e-12 &&
                            std::abs(r.v_score - ak.v_score) <= 1e-12;
    bad += !(swap_ok && relabel_ok);
  }
  o.require(bad == 0, std::to_string(bad) + " of 500 random pairs broke symmetry or invariance");
  o.note("7 fixed examples, 500 random pairs");
  return o;
}

int run_cli(std::vector<std::string> args, std::string* captured = nullptr) {
  args.insert(args.begin(), "cryptoscope");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (captured) *captured = out.str() + err.str();
  return rc;
}

// Time to read, summarize and vectorize one trace at the event cap.
double cap_extraction_seconds(const fs::path& dir, std::size_t* events) {
  Rng rng(9);
  auto t = testing_support::random_trace(rng, kMaxTraceEvents, 50000);
  *events = t.events.size();
  const auto file = dir / "cap.trace";
  {
    std::ofstream out(file, std::ios::binary);
    write_trace(out, t);
  }
  const FeatureSpace space = fit_space(std::vector<Trace>{t}, {Basis::INSTRUCTION, Representation::PROPORTION, true, 2});
  t = Trace{};
  const auto t0 = Clock::now();
  std::ifstream in(file, std::ios::binary);
  const auto back = read_trace(in);
  const auto v = extract(back, space);
  const double secs = since(t0);
  if (v.size() != space.dimension()) return 1e9;
  return secs;
}

const json& row(const json& report, const std::string& table) { return report.at("tables").at(table).at("rows"); }

double cv_acc(const json& report, const std::string& model, const std::string& task) {
  return row(report, "cv_matrix").at(model).at(task).at("mean_accuracy").get<double>();
}

}  // namespace

int main() {
  testing_support::TempDir tmp;

  report(1, "crypto correctness", crypto_correctness());
  report(2, "feature laws", feature_laws());
  report(3, "learner oracles", learner_oracles());

  // Criteria 4 to 8 and the report half of 10 run the shipped pipeline on
  // the default corpus.
  const auto corpus = (tmp / "corpus").string();
  const auto report_path = (tmp / "report.json").string();
  std::string gen_out, report_out;
  auto t0 = Clock::now();
  const int gen_rc = run_cli({"corpus", "generate", "--out", corpus, "--seed", "42"}, &gen_out);
  const double gen_secs = since(t0);
  t0 = Clock::now();
  const int report_rc = gen_rc == 0 ? run_cli({"report", "--corpus", corpus, "--out", report_path, "--seed", "42"}, &report_out) : -1;
  const double report_secs = since(t0);
  json rep;
  if (report_rc == 0) rep = json::parse(read_file(report_path));

  const auto pipeline = [&](const std::function<void(Outcome&)>& body) {
    Outcome o;
    if (report_rc != 0) {
      o.require(false, "pipeline failed: " + gen_out + report_out);
      return o;
    }
    try {
      body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("report lookup failed: ") + e.what());
    }
    return o;
  };

  report(4, "detection quality", pipeline([&](Outcome& o) {
           const auto samples = rep.at("corpus_summary").at("samples").get<std::size_t>();
           const double tree = cv_acc(rep, "tree", "detect"), svm = cv_acc(rep, "svm-linear", "detect");
           o.require(samples == 312, std::to_string(samples) + " samples");
           o.require(tree >= 0.95, "tree " + num(tree));
           o.require(svm >= 0.90, "linear SVM " + num(svm));
           o.require(gen_secs + report_secs < 300, "took " + num(gen_secs + report_secs) + " s");
           o.note("tree " + num(tree) + " (>= 0.95), linear SVM " + num(svm) + " (>= 0.90), " +
                  num(gen_secs + report_secs, 1) + " s including generation");
         }));

  report(5, "algorithm classification", pipeline([&](Outcome& o) {
           const double tree = cv_acc(rep, "tree", "algo"), svm = cv_acc(rep, "svm-linear", "algo");
           const auto classes = rep.at("tables").at("model3").at("classes").size();
           o.require(classes == 6, std::to_string(classes) + " classes");
           o.require(tree >= 0.90, "tree " + num(tree));
           o.require(svm >= 0.85, "linear SVM " + num(svm));
           o.note("tree " + num(tree) + " (>= 0.90), linear SVM " + num(svm) + " (>= 0.85) over 6 classes");
         }));

  report(6, "kernel ordering", pipeline([&](Outcome& o) {
           const auto& k = row(rep, "kernel_accuracy");
           const double lin = k.at("linear").at("mean").get<double>();
           std::string means;
           for (const char* other : {"rbf", "poly", "sigmoid"}) {
             const double m = k.at(other).at("mean").get<double>();
             o.require(lin >= m, std::string("linear mean below ") + other);
             means += std::string(", ") + other + " " + num(m);
           }
           for (const char* task : {"detect", "type", "algo"}) {
             const double s = k.at("sigmoid").at(task).get<double>();
             bool unique = true;
             for (const char* other : {"linear", "rbf", "poly"}) unique = unique && s > k.at(other).at(task).get<double>();
             o.require(!unique, std::string("sigmoid uniquely best on ") + task);
           }
           o.note("mean accuracy linear " + num(lin) + means);
         }));

  report(7, "feature-set contrast", pipeline([&](Outcome& o) {
           // ALGO, instruction basis, loop features off: the feature-set table.
           const json* count = nullptr;
           const json* prop = nullptr;
           for (const auto& r : row(rep, "feature_set_summary")) {
             if (r.at("features") == "instruction/count") count = &r;
             if (r.at("features") == "instruction/proportion") prop = &r;
           }
           if (!count || !prop) throw std::runtime_error("instruction rows missing");
           const double vc = count->at("algo").at("kmeans").at("v_score").get<double>();
           const double vp = prop->at("algo").at("kmeans").at("v_score").get<double>();
           const double fc = count->at("algo").at("svm-linear").at("f1").get<double>();
           const double fp = prop->at("algo").at("svm-linear").at("f1").get<double>();
           o.require(vc > vp, "k-means v-score count " + num(vc) + " not above proportion " + num(vp));
           o.require(fp >= fc, "linear SVM macro-F1 proportion " + num(fp) + " below count " + num(fc));
           if (o.pass) o.note("v-score count " + num(vc) + " > proportion " + num(vp) + ", macro-F1 proportion " + num(fp) +
                              " >= count " + num(fc));
         }));

  report(8, "bitwise-ratio separation", pipeline([&](Outcome& o) {
           const auto& bw = rep.at("corpus_summary").at("bitwise_ratio");
           const double crypto = bw.at("crypto_mean").get<double>(), plain = bw.at("plain_mean").get<double>();
           o.require(crypto > plain, "crypto mean " + num(crypto) + " not above plain " + num(plain));
           std::string above;
           for (const auto& p : bw.at("programs_above_0.55")) above += (above.empty() ? "" : ",") + p.get<std::string>();
           o.note("crypto mean " + num(crypto) + " > plain mean " + num(plain) + "; families above 0.55: " +
                  (above.empty() ? "none" : above));
         }));

  report(9, "metrics correctness", metrics_correctness());

  {
    Outcome o;
    std::size_t events = 0;
    const double cap = cap_extraction_seconds(tmp.path(), &events);
    o.require(cap <= 3.0, "extraction at the cap took " + num(cap) + " s");
    o.require(report_rc == 0, "report run failed");
    o.require(gen_secs + report_secs <= 900, "report run took " + num(gen_secs + report_secs) + " s");
    o.note(std::to_string(events) + "-event trace extracted in " + num(cap, 2) + " s (<= 3), corpus + report " +
           num(gen_secs + report_secs, 1) + " s (<= 900)");
    report(10, "performance envelope", o);
  }

  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
