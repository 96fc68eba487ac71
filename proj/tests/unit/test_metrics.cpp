#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "asag/error.hpp"
#include "asag/metrics.hpp"
#include "metric_cases.hpp"

using namespace asag;

namespace {

void expect_rate(const std::optional<double>& got, double want, const char* what, const char* name) {
    if (std::isnan(want)) {
        EXPECT_FALSE(got.has_value()) << name << " " << what;
    } else {
        ASSERT_TRUE(got.has_value()) << name << " " << what;
        EXPECT_NEAR(*got, want, 1e-12) << name << " " << what;
    }
}

Response resp(const std::string& id, Label gold, Provenance p) { return {id, "a", "t", gold, p}; }

}  // namespace

TEST(Metrics, HandComputedCases) {
    for (const auto& m : fixtures::kMetricCases) {
        const Confusion c{m.tp, m.fp, m.tn, m.fn};
        expect_rate(c.precision(), m.precision, "precision", m.name);
        expect_rate(c.recall(), m.recall, "recall", m.name);
        expect_rate(c.f1(), m.f1, "f1", m.name);
        expect_rate(c.accuracy(), m.accuracy, "accuracy", m.name);
        expect_rate(c.fpr(), m.fpr, "fpr", m.name);
        expect_rate(c.tnr(), m.tnr, "tnr", m.name);
        if (c.fpr()) EXPECT_NEAR(*c.fpr() + *c.tnr(), 1.0, 1e-15) << m.name;
    }
}

TEST(Metrics, AddCountsEachCell) {
    Confusion c;
    c.add(Label::Correct, Label::Correct);
    c.add(Label::Correct, Label::Incorrect);
    c.add(Label::Incorrect, Label::Incorrect);
    c.add(Label::Incorrect, Label::Correct);
    c.add(Label::Incorrect, Label::Correct);
    EXPECT_EQ(c, (Confusion{1, 1, 1, 2}));
    c += Confusion{1, 0, 0, 0};
    EXPECT_EQ(c.tp, 2u);
    EXPECT_EQ(c.total(), 6u);
}

TEST(Metrics, GroupsByProvenance) {
    const std::vector<Response> gold = {
        resp("r1", Label::Correct, Provenance::Real),    resp("r2", Label::Incorrect, Provenance::Real),
        resp("g1", Label::Incorrect, Provenance::GamingS1a), resp("g2", Label::Incorrect, Provenance::GamingS1c),
        resp("g3", Label::Incorrect, Provenance::GamingS3),
    };
    const std::vector<Label> pred = {Label::Correct, Label::Correct, Label::Correct, Label::Incorrect, Label::Correct};
    const auto rep = confusion_from_labels(gold, pred);
    EXPECT_EQ(*rep.group("real"), (Confusion{1, 1, 0, 0}));
    EXPECT_EQ(*rep.group("s1a"), (Confusion{0, 1, 0, 0}));
    EXPECT_EQ(*rep.group("s1c"), (Confusion{0, 0, 1, 0}));
    EXPECT_EQ(*rep.group("s1"), (Confusion{0, 1, 1, 0}));
    EXPECT_EQ(*rep.group("s3"), (Confusion{0, 1, 0, 0}));
    EXPECT_EQ(*rep.group("gaming"), (Confusion{0, 2, 1, 0}));
    EXPECT_EQ(*rep.group("overall"), (Confusion{1, 3, 1, 0}));
    EXPECT_EQ(rep.group("s2"), nullptr);
    EXPECT_EQ(rep.group("s1b"), nullptr);
    EXPECT_THROW(confusion_from_labels(gold, {Label::Correct}), Error);

    std::vector<Prediction> preds(1);
    preds[0].response_id = "nope";
    EXPECT_THROW(confusion(preds, gold), Error);
}

TEST(Metrics, JsonRoundTripAndNulls) {
    MetricsReport r;
    r.groups["s1"] = Confusion{0, 11, 89, 0};
    r.groups["real"] = Confusion{62, 2, 31, 5};
    const auto j = to_json(r);
    EXPECT_TRUE(j["s1"]["precision"].is_null());
    EXPECT_DOUBLE_EQ(j["s1"]["fpr"].get<double>(), 0.11);
    EXPECT_EQ(j["real"]["n"], 100);
    const auto back = metrics_report_from_json(j);
    EXPECT_EQ(back.groups, r.groups);
}

TEST(Metrics, CompareReports) {
    MetricsReport before, after;
    before.groups["s1"] = {0, 10, 90, 0};
    after.groups["s1"] = {0, 2, 98, 0};
    before.groups["s2"] = {0, 0, 10, 0};
    after.groups["s2"] = {0, 1, 9, 0};
    const auto d = compare_reports(before, after);
    EXPECT_NEAR(*d.groups.at("s1").absolute, -0.08, 1e-15);
    EXPECT_NEAR(*d.groups.at("s1").relative, -0.8, 1e-12);
    EXPECT_FALSE(d.groups.at("s1").fpr_increased);
    EXPECT_FALSE(d.groups.at("s2").relative.has_value());  // baseline FPR of zero
    EXPECT_TRUE(d.groups.at("s2").fpr_increased);
    after.groups.erase("s2");
    EXPECT_THROW(compare_reports(before, after), Error);
}

TEST(Metrics, Tables) {
    MetricsReport a, b;
    a.groups["s1"] = {0, 1, 3, 0};
    a.groups["s3"] = {0, 1, 1, 0};
    b.groups["s1"] = {0, 0, 4, 0};
    const auto t = fpr_table_csv({{"baseline", &a}, {"advt1", &b}});
    EXPECT_EQ(t,
              "strategy,FPR (baseline),FPR (advt1)\n"
              "Information from stem,0.2500,0.0000\n"
              "Clinical case summary,,\n"
              "Mixed responses,0.5000,\n");
    EXPECT_EQ(accuracy_table_csv(a, {"s1"}), "strategy,Accuracy,TNR,FPR\nInformation from stem,0.7500,0.7500,0.2500\n");
}
