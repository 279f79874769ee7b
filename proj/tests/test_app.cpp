#include <sic/app.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace sic;
using sic::app::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("sic_test_app_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json small_run(const fs::path& dir) {
    return {{"dataset", {{"samples", 3000}}},
            {"canceler", {{"kind", "lwgs"}, {"N", 4}}},
            {"hyper", {{"epochs", 2}}},
            {"protocol", {{"n_seeds", 2}}},
            {"sweep", {{"N", {3, 4}}}},
            {"output", {{"dir", dir.string()}}}};
}

json without_timing(json j) {
    j.erase("timing");
    return j;
}

int run(const std::function<void()>& fn) {
    std::ostringstream err;
    return app::guarded(fn, err);
}

} // namespace

TEST(Config, DefaultsResolve) {
    const auto c = app::resolve_config(json::object());
    EXPECT_TRUE(c.synthetic);
    EXPECT_EQ(c.samples, 20480u);
    EXPECT_EQ(c.canceler.kind, CancelerKind::lwgs);
    EXPECT_EQ(c.canceler.N, 9);
    EXPECT_EQ(c.hyper.lr, 0.0045);
    EXPECT_EQ(c.hyper.batch, 62);
    EXPECT_EQ(c.hyper.epochs, 50);
    EXPECT_EQ(c.n_seeds, 20);
    EXPECT_EQ(c.split.train_fraction, 0.9);
    EXPECT_EQ(c.tx.pa_coeffs, default_tx_config().pa_coeffs);
}

TEST(Config, UnknownKeysAndBadTypesRejected) {
    EXPECT_THROW(app::resolve_config({{"canceler", {{"depth", 3}}}}), ConfigError);
    EXPECT_THROW(app::resolve_config({{"bogus", 1}}), ConfigError);
    EXPECT_THROW(app::resolve_config({{"hyper", {{"lr", "fast"}}}}), ConfigError);
    EXPECT_THROW(app::resolve_config({{"hyper", {{"lr", -1.0}}}}), ConfigError);
    EXPECT_THROW(app::resolve_config({{"canceler", {{"kind", "lwgs"}, {"N", 20}}}}), ConfigError);
    EXPECT_THROW(app::resolve_config({{"canceler", {{"kind", "poly"}, {"P", 4}}}}), ConfigError);
    EXPECT_THROW(app::resolve_config({{"dataset", {{"source", "file"}}}}), ConfigError);
    try {
        app::resolve_config({{"canceler", {{"depth", 3}}}});
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("canceler.depth"), std::string::npos);
    }
}

TEST(Config, DigestTracksContent) {
    const auto a = app::resolve_config(json::object());
    const auto b = app::resolve_config(json::object());
    const auto c = app::resolve_config({{"hyper", {{"epochs", 3}}}});
    EXPECT_EQ(a.digest_hex(), b.digest_hex());
    EXPECT_NE(a.digest_hex(), c.digest_hex());
}

TEST(CancelerToken, Forms) {
    EXPECT_EQ(app::parse_canceler_token("lwgs9", 13).N, 9);
    const auto m = app::parse_canceler_token("mwgs12x5", 13);
    EXPECT_EQ(m.kind, CancelerKind::mwgs);
    EXPECT_EQ(m.N, 12);
    EXPECT_EQ(m.W, 5);
    EXPECT_EQ(app::parse_canceler_token("mwgs:12:5", 13).W, 5);
    EXPECT_EQ(app::parse_canceler_token("poly5", 13).P, 5);
    EXPECT_EQ(app::parse_canceler_token("linear", 13).kind, CancelerKind::linear);
    EXPECT_THROW(app::parse_canceler_token("lwgs", 13), ConfigError);
    EXPECT_THROW(app::parse_canceler_token("mwgs12", 13), ConfigError);
    EXPECT_THROW(app::parse_canceler_token("tree3", 13), ConfigError);
    EXPECT_THROW(app::parse_canceler_token("poly4", 13), ConfigError);
}

TEST(Flops, DefaultTableFromCommand) {
    std::ostringstream os;
    const auto rows = app::cmd_flops({}, os);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[2].flops_total, 780);
    EXPECT_NE(os.str().find("\"LWGS (9)\",162,231,549,780,-48.08,-49.87"), std::string::npos) << os.str();

    app::FlopsOptions opt;
    opt.specs = {"lwgs9", "mwgs12x5"};
    opt.baseline = "poly5";
    opt.format = "json";
    std::ostringstream js;
    const auto r2 = app::cmd_flops(opt, js);
    ASSERT_EQ(r2.size(), 3u);
    EXPECT_DOUBLE_EQ(round2(*r2[2].pct_flop_reduction), -34.19);
    EXPECT_TRUE(json::parse(js.str()).contains("rows"));
}

TEST(Commands, SynthTrainEvalAreReproducible) {
    const auto dir = scratch("train");
    const auto c = app::resolve_config(small_run(dir));
    std::ostringstream os;
    const auto ds = app::cmd_synth(c, {}, os);
    EXPECT_TRUE(fs::exists(ds));
    EXPECT_TRUE(same_content(read_dataset(ds), synth_dataset(c.tx, c.samples, c.memory)));

    const auto out1 = app::cmd_train(c, os);
    const auto r1 = without_timing(app::read_json_file(out1.results));
    const auto model1 = detail::read_file(out1.model);
    const auto out2 = app::cmd_train(c, os);
    EXPECT_EQ(r1, without_timing(app::read_json_file(out2.results)));
    EXPECT_EQ(model1, detail::read_file(out2.model));
    EXPECT_TRUE(std::isfinite(out1.trial.cancellation_db));

    const auto e1 = app::cmd_eval(out1.model, ds, 0.0, dir, os);
    EXPECT_DOUBLE_EQ(e1.metrics.total_db, out1.trial.cancellation_db);
    const auto j1 = without_timing(app::read_json_file(e1.results));
    app::cmd_eval(out1.model, ds, 0.0, dir, os);
    EXPECT_EQ(j1, without_timing(app::read_json_file(e1.results)));
    fs::remove_all(dir);
}

TEST(Commands, ModelRoundTripIsBitExact) {
    const auto d = synth_dataset(default_tx_config(), 2000);
    CancelerConfig cc;
    cc.kind = CancelerKind::mwgs;
    cc.N = 4;
    cc.W = 3;
    TrainHyper h;
    h.epochs = 1;
    const auto s = fit_stack(d, cc, h).stack;
    const auto back = load_model(save_model(s));
    EXPECT_EQ(predict_total(back, d.x), predict_total(s, d.x));
    EXPECT_EQ(save_model(back), save_model(s));

    cc.kind = CancelerKind::poly;
    cc.P = 3;
    cc.M = 4;
    const auto p = fit_stack(d, cc, h).stack;
    EXPECT_EQ(predict_total(load_model(save_model(p)), d.x), predict_total(p, d.x));
}

TEST(Commands, MalformedModelIsParseError) {
    EXPECT_THROW(load_model("{"), ParseError);
    EXPECT_THROW(load_model(R"({"format":"other"})"), ParseError);
    EXPECT_THROW(load_model(R"({"format":"sic-model","version":1,"kind":"lwgs","M":13})"), ParseError);
}

TEST(ExitCodes, MapErrorFamilies) {
    EXPECT_EQ(run([] {}), app::exit_ok);
    EXPECT_EQ(run([] { throw ConfigError("x"); }), app::exit_config);
    EXPECT_EQ(run([] { throw DivergenceError("x", 1, 1); }), app::exit_divergence);
    EXPECT_EQ(run([] { throw IncompatibleError("x"); }), app::exit_incompatible);
    EXPECT_EQ(run([] { throw ParseError(ParseErrorKind::bad_magic, "x"); }), app::exit_parse);
    EXPECT_EQ(run([] { throw ResourceCapError("x"); }), app::exit_cap);
    EXPECT_EQ(run([] { throw std::logic_error("x"); }), app::exit_other);
}

TEST(Commands, EvalRejectsMemoryMismatch) {
    const auto dir = scratch("mismatch");
    auto cfg = small_run(dir);
    cfg["canceler"] = {{"kind", "linear"}};
    const auto c = app::resolve_config(cfg);
    std::ostringstream os;
    const auto out = app::cmd_train(c, os);
    auto other = synth_dataset(default_tx_config(), 3000, 7);
    write_dataset(other, dir / "m7.sic");
    EXPECT_EQ(run([&] { app::cmd_eval(out.model, dir / "m7.sic", 0.0, dir, os); }), app::exit_incompatible);
    fs::remove_all(dir);
}

TEST(Sweep, CapAndEmptyLists) {
    const auto dir = scratch("sweep_cap");
    auto cfg = small_run(dir);
    cfg["sweep"]["cap"] = 1;
    std::ostringstream os;
    EXPECT_EQ(run([&] { app::cmd_sweep(app::resolve_config(cfg), os); }), app::exit_cap);
    EXPECT_FALSE(fs::exists(dir / "index.json"));

    cfg["sweep"]["cap"] = 64;
    cfg["sweep"]["N"] = json::array();
    try {
        app::cmd_sweep(app::resolve_config(cfg), os);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("sweep.N"), std::string::npos);
    }
    cfg["sweep"]["N"] = {3};
    cfg["sweep"]["kind"] = "mwgs";
    cfg["sweep"]["W"] = json::array();
    try {
        app::cmd_sweep(app::resolve_config(cfg), os);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("sweep.W"), std::string::npos);
    }
    fs::remove_all(dir);
}

TEST(Sweep, WritesDeterministicResults) {
    const auto dir = scratch("sweep");
    const auto c = app::resolve_config(small_run(dir));
    std::ostringstream os;
    const auto index = app::cmd_sweep(c, os);
    const auto first = without_timing(app::read_json_file(index));
    const auto per = detail::read_file(dir / "results_lwgs_N3.json");
    ASSERT_EQ(first["combinations"].size(), 2u);
    app::cmd_sweep(c, os);
    EXPECT_EQ(first, without_timing(app::read_json_file(index)));
    EXPECT_EQ(per, detail::read_file(dir / "results_lwgs_N3.json"));
    EXPECT_TRUE(fs::exists(dir / "trials_lwgs_N4.csv"));
    fs::remove_all(dir);
}
