#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ejab/ctg/pipeline.hpp"
#include "ejab/ctg/record_io.hpp"
#include "md5_oracle.hpp"

using namespace ejab::ctg;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json fixture() { return json::parse(read_file(std::string(EJAB_TEST_DATA_DIR) + "/ctg_fixture.json")); }

RawAnalysisRow make_row(const std::string& id, std::size_t index, const std::string& value, const std::string& p,
                        const std::string& method) {
    RawAnalysisRow r;
    r.analysis_id = id;
    r.row_index = index;
    r.row_ref = id + ":" + std::to_string(index);
    r.value = value;
    r.p_value = p;
    r.statistical_method = method;
    return r;
}

std::vector<RawAnalysisRow> rows_for(const std::string& method, std::initializer_list<const char*> values,
                                     const std::string& p = "0.01") {
    std::vector<RawAnalysisRow> rows;
    std::size_t i = 0;
    for (const char* v : values) {
        rows.push_back(make_row("a", i, v, p, method));
        ++i;
    }
    return rows;
}

const AnalysisRecord* find_by_title_and_method(const IngestResult& r, const std::string& nct, const std::string& method) {
    for (const auto& rec : r.records) {
        if (rec.study.nct_id == nct && rec.original_method == method) return &rec;
    }
    return nullptr;
}

std::size_t count_reason(const IngestResult& r, std::string_view why) {
    return std::count_if(r.drops.begin(), r.drops.end(), [&](const Drop& d) { return d.reason == why; });
}

}  // namespace

// p-value text

TEST(StandardizeP, LessThanIsFlagged) {
    const auto p = standardize_p("<0.05");
    ASSERT_TRUE(p);
    EXPECT_EQ(p->p, 0.05);
    EXPECT_TRUE(p->has_less_than);
}

TEST(StandardizeP, PlainNumber) {
    const auto p = standardize_p("0.0031");
    ASSERT_TRUE(p);
    EXPECT_EQ(p->p, 0.0031);
    EXPECT_FALSE(p->has_less_than);
}

TEST(StandardizeP, DropsNonNumericAndOutOfRange) {
    EXPECT_FALSE(standardize_p("NS"));
    EXPECT_FALSE(standardize_p("1.0"));
    EXPECT_FALSE(standardize_p("0"));
    EXPECT_FALSE(standardize_p(""));
    EXPECT_FALSE(standardize_p("12"));
}

TEST(StandardizeP, FirstNumericMatchWins) {
    EXPECT_EQ(standardize_p("p = 0.5")->p, 0.5);
    EXPECT_EQ(standardize_p(".04")->p, 0.04);
    // first token is "0.01"; later numbers ignored
    EXPECT_EQ(standardize_p("0.01 (adjusted 0.2)")->p, 0.01);
    // exponent notation is not part of the pattern: "1e-5" extracts "1" and drops
    EXPECT_FALSE(standardize_p("1e-5"));
}

TEST(StandardizeP, PathologicalTextNeverThrows) {
    for (const char* s : {"...", "<<<", "0.", "...5", "\xff\xfe", "p<.", "999999999999999999999999999"}) {
        EXPECT_NO_THROW(standardize_p(s)) << s;
    }
    EXPECT_EQ(standardize_p("...5")->p, 0.5);
}

// method harmonization

struct MethodCase {
    const char* text;
    std::optional<Method> expected;
};

TEST(HarmonizeMethod, RuleTable) {
    const MethodCase cases[] = {
        {"Paired t-test", Method::OneSampleT},
        {"One sample t test", Method::OneSampleT},
        {"one-sample T-Test", Method::OneSampleT},
        {"t-test, 2 sided", Method::TwoSampleT},
        {"Student's ttest", Method::TwoSampleT},
        {"Conditional logistic regression", Method::ConditionalLogistic},
        {"Regression, Logistic", Method::Logistic},
        {"Cox Proportional Hazards", Method::Cox},
        {"Log Rank", Method::Logrank},
        {"logrank", Method::Logrank},
        {"Mantel-Cox", Method::Logrank},
        {"Mann-Whitney U", Method::MannWhitney},
        {"Wilcoxon rank-sum", Method::MannWhitney},
        {"Wilcoxon (Signed Rank)", Method::WilcoxonSignedRank},
        {"Kruskal-Wallis", Method::KruskalWallis},
        {"Chi-squared", Method::ChiSquared},
        {"chisq", Method::ChiSquared},
        {"Mixed model for repeated measures", Method::RepeatedMeasures},
        {"Repeated Measure ANOVA", Method::RepeatedMeasures},
        {"Regression, Linear", Method::LinearRegression},
        {"ANOVA", Method::Anova},
        {"Analysis of Variance", Method::Anova},
        {"Fisher exact", std::nullopt},
        {"Mixed Models Analysis", std::nullopt},
        {"Wilcoxon", std::nullopt},
        {"", std::nullopt},
    };
    for (const auto& c : cases) {
        EXPECT_EQ(harmonize_method(c.text), c.expected) << c.text;
    }
}

TEST(HarmonizeMethod, OrderMatters) {
    // t-test rule fires before the regression rules
    EXPECT_EQ(harmonize_method("t-test on logistic regression coefficient"), Method::TwoSampleT);
    // "cox" inside "Wilcoxon" must not read as Cox
    EXPECT_EQ(harmonize_method("Wilcoxon signed rank"), Method::WilcoxonSignedRank);
    // ANCOVA is not an ANOVA match
    EXPECT_EQ(harmonize_method("ANCOVA"), std::nullopt);
    // a regression that is also called ANOVA resolves to lm first
    EXPECT_EQ(harmonize_method("linear regression ANOVA"), Method::LinearRegression);
}

TEST(MethodLabels, RoundTrip) {
    for (Method m : kAllMethods) EXPECT_EQ(method_from_label(to_label(m)), m);
    EXPECT_FALSE(method_from_label("nope"));
}

// one-sided adjustment

TEST(AdjustOneSided, Examples) {
    auto a = adjust_one_sided(0.03, "one-sided t-test");
    EXPECT_DOUBLE_EQ(a.p, 0.06);
    EXPECT_TRUE(a.adjusted);
    a = adjust_one_sided(0.7, "1-sided");
    EXPECT_EQ(a.p, 1.0);
    EXPECT_TRUE(a.adjusted);
    a = adjust_one_sided(0.03, "t-test");
    EXPECT_EQ(a.p, 0.03);
    EXPECT_FALSE(a.adjusted);
    EXPECT_TRUE(adjust_one_sided(0.1, "ONE-SIDED").adjusted);
}

// analysis ids

TEST(AnalysisId, MatchesIndependentDigest) {
    const json outcome = {{"t", "x"}};
    const json analysis = {{"p", "0.05"}};
    const std::string bytes = "NCT00000001" + ejab::oracle::canonical(outcome) + ejab::oracle::canonical(analysis);
    EXPECT_EQ(bytes, R"(NCT00000001{"t":"x"}{"p":"0.05"})");
    EXPECT_EQ(analysis_id("NCT00000001", outcome, analysis), ejab::oracle::md5(bytes));
}

TEST(AnalysisId, OracleMd5KnownVectors) {
    EXPECT_EQ(ejab::oracle::md5(""), "d41d8cd98f00b204e9800998ecf8427e");
    EXPECT_EQ(ejab::oracle::md5("abc"), "900150983cd24fb0d6963f7d28e17f72");
    EXPECT_EQ(ejab::oracle::md5("12345678901234567890123456789012345678901234567890123456789012345678901234567890"),
              "57edf4a22be3c955ac49da2e2107b67a");
    EXPECT_EQ(md5_hex("abc"), "900150983cd24fb0d6963f7d28e17f72");
}

TEST(AnalysisId, NestedDocumentsAgreeWithOracle) {
    const json doc = fixture();
    for (const auto& study : doc) {
        const auto* outcomes = detail::find_path(study, {"resultsSection", "outcomeMeasuresModule", "outcomeMeasures"});
        if (!outcomes) continue;
        const std::string nct = study["protocolSection"]["identificationModule"]["nctId"];
        for (const auto& outcome : *outcomes) {
            if (!outcome.is_object()) continue;
            for (const auto& analysis : outcome["analyses"]) {
                const std::string bytes = nct + ejab::oracle::canonical(outcome) + ejab::oracle::canonical(analysis);
                EXPECT_EQ(analysis_id(nct, outcome, analysis), ejab::oracle::md5(bytes));
            }
        }
    }
}

TEST(AnalysisId, KeyOrderDoesNotMatter) {
    const json a = json::parse(R"({"b":1,"a":{"z":[1,{"y":2,"x":3}],"c":"é"}})");
    const json b = json::parse(R"({"a":{"c":"é","z":[1,{"x":3,"y":2}]},"b":1})");
    const json analysis1 = json::parse(R"({"pValue":"0.05","groupIds":["OG000"]})");
    const json analysis2 = json::parse(R"({"groupIds":["OG000"],"pValue":"0.05"})");
    EXPECT_EQ(analysis_id("NCT1", a, analysis1), analysis_id("NCT1", b, analysis2));
}

TEST(AnalysisId, SensitiveToEveryPart) {
    const json o = {{"t", "x"}};
    const json a = {{"p", "0.05"}};
    const auto base = analysis_id("NCT00000001", o, a);
    EXPECT_EQ(base.size(), 32u);
    EXPECT_TRUE(std::all_of(base.begin(), base.end(), [](char c) { return std::isxdigit(c) && !std::isupper(c); }));
    EXPECT_NE(base, analysis_id("NCT00000002", o, a));
    EXPECT_NE(base, analysis_id("NCT00000001", json{{"t", "y"}}, a));
    EXPECT_NE(base, analysis_id("NCT00000001", o, json{{"p", "0.06"}}));
    // array order is significant
    EXPECT_NE(analysis_id("N", json::array({1, 2}), a), analysis_id("N", json::array({2, 1}), a));
}

// flatten

TEST(Flatten, OneRowPerQualifyingDenominator) {
    const json study = json::parse(R"({
      "protocolSection": {"identificationModule": {"nctId": "NCT1"}},
      "resultsSection": {"outcomeMeasuresModule": {"outcomeMeasures": [{
        "type": "PRIMARY", "title": "T",
        "groups": [{"id": "OG000", "description": "A"}, {"id": "OG001", "description": "B"}, {"id": "OG002"}],
        "denoms": [
          {"units": "Participants", "counts": [{"groupId": "OG000", "value": "10"}, {"groupId": "OG001", "value": "12"},
                                               {"groupId": "OG002", "value": "99"}]},
          {"units": "Events", "counts": [{"groupId": "OG000", "value": "7"}]}
        ],
        "analyses": [{"groupIds": ["OG000", "OG001"], "pValue": "0.04", "statisticalMethod": "t-test"}]
      }]}}
    })");
    const auto flat = flatten(study);
    ASSERT_EQ(flat.rows.size(), 2u);
    EXPECT_EQ(flat.rows[0].group_id, "OG000");
    EXPECT_EQ(flat.rows[0].value, "10");
    EXPECT_EQ(flat.rows[0].group_description, "A");
    EXPECT_EQ(flat.rows[1].group_id, "OG001");
    EXPECT_EQ(flat.rows[1].value, "12");
    EXPECT_EQ(flat.rows[0].analysis_id, flat.rows[1].analysis_id);
    EXPECT_EQ(flat.rows[0].units, "Participants");
    EXPECT_EQ(flat.rows[0].row_index + 1, flat.rows[1].row_index);
    EXPECT_EQ(flat.rows[0].row_ref, "NCT1:0:0:OG000");
    EXPECT_TRUE(flat.warnings.empty());
}

TEST(Flatten, EventsOnlyAndEmptyAnalysesGiveNothing) {
    const json study = json::parse(R"({
      "protocolSection": {"identificationModule": {"nctId": "NCT1"}},
      "resultsSection": {"outcomeMeasuresModule": {"outcomeMeasures": [
        {"denoms": [{"units": "Events", "counts": [{"groupId": "OG000", "value": "7"}]}],
         "analyses": [{"groupIds": ["OG000"], "pValue": "0.04", "statisticalMethod": "t-test"}]},
        {"denoms": [{"units": "Participants", "counts": [{"groupId": "OG000", "value": "7"}]}],
         "analyses": []}
      ]}}
    })");
    const auto flat = flatten(study);
    EXPECT_TRUE(flat.rows.empty());
    EXPECT_TRUE(flat.warnings.empty());
}

TEST(Flatten, MetadataCarriedForward) {
    const auto flat = flatten(fixture());
    ASSERT_FALSE(flat.rows.empty());
    const auto& first = flat.rows.front();
    ASSERT_TRUE(first.study);
    EXPECT_EQ(first.study->nct_id, "NCT90000001");
    EXPECT_EQ(first.study->brief_title, "Glycaemic control with drug A");
    EXPECT_EQ(first.study->study_type, "INTERVENTIONAL");
    EXPECT_EQ(first.study->allocation, "RANDOMIZED");
    EXPECT_TRUE(first.study->phases[3]);
    EXPECT_FALSE(first.study->phases[2]);
    EXPECT_EQ(first.study->condition_ids, std::vector<std::string>{"D003924"});
    EXPECT_EQ(first.study->intervention_mesh, std::vector<std::string>{"Hypoglycemic Agents"});
    EXPECT_TRUE(first.study->has_results_or_derived);
    EXPECT_EQ(first.outcome_type, "PRIMARY");
    EXPECT_EQ(first.outcome_title, "Change in HbA1c");
}

TEST(Flatten, MalformedOutcomeIsSkippedWithWarning) {
    const auto flat = flatten(fixture());
    ASSERT_EQ(flat.warnings.size(), 1u);
    EXPECT_NE(flat.warnings[0].find("NCT90000002:3"), std::string::npos);
}

TEST(Flatten, MalformedDocumentsThrowWithStudyId) {
    EXPECT_THROW(flatten(json::parse(R"([{"protocolSection": {}}])")), MalformedDocument);
    EXPECT_THROW(flatten(json::parse("[42]")), MalformedDocument);
    EXPECT_THROW(flatten(json::parse("17")), MalformedDocument);
    try {
        flatten(json::parse(R"([{"protocolSection": {"identificationModule": {"nctId": "NCT1"}}}, 3])"));
        FAIL();
    } catch (const MalformedDocument& e) {
        EXPECT_NE(std::string(e.what()).find("#1"), std::string::npos);
    }
}

TEST(Flatten, AcceptsWrappedAndSingleStudy) {
    const json doc = fixture();
    const auto plain = flatten(doc).rows.size();
    EXPECT_EQ(flatten(json{{"studies", doc}}).rows.size(), plain);
    EXPECT_EQ(flatten(doc[0]).rows.size(), flatten(json::array({doc[0]})).rows.size());
    EXPECT_TRUE(flatten(json::array()).rows.empty());
}

// aggregation

TEST(Aggregate, CoxUsesHalfTheSum) {
    const auto out = aggregate(rows_for("Cox Proportional Hazards", {"120", "80"}));
    ASSERT_TRUE(out.record);
    EXPECT_EQ(out.record->n, 100.0);
    EXPECT_EQ(out.record->method, Method::Cox);
}

TEST(Aggregate, SingleRowFamiliesWithManyRowsAreDropped) {
    for (const char* method : {"One-sample t-test", "Paired t-test", "Wilcoxon signed rank"}) {
        const auto out = aggregate(rows_for(method, {"20", "22"}));
        EXPECT_FALSE(out.record) << method;
        ASSERT_EQ(out.drops.size(), 1u);
        EXPECT_EQ(out.drops[0].reason, reason::kQcMultiRow);
        EXPECT_EQ(out.drops[0].rows, 2u);
    }
}

TEST(Aggregate, AnovaGroupsAndDimension) {
    auto out = aggregate(rows_for("ANOVA", {"10", "12", "14"}));
    ASSERT_TRUE(out.record);
    EXPECT_EQ(out.record->n, 36.0);
    EXPECT_EQ(out.record->groups, 3);
    EXPECT_FALSE(finalize(*out.record));
    EXPECT_EQ(out.record->q, 2);
    EXPECT_EQ(out.record->model, "anova");
    EXPECT_DOUBLE_EQ(out.record->ejab01, ejab::ejab01(0.01, 36.0, 2));
}

TEST(Aggregate, EffectiveSampleSizeRules) {
    EXPECT_EQ(aggregate(rows_for("Conditional logistic regression", {"20", "25", "7"})).record->n, 25.0);
    EXPECT_EQ(aggregate(rows_for("Log rank", {"31", "30"})).record->n, 30.5);
    EXPECT_EQ(aggregate(rows_for("t-test", {"31", "30"})).record->n, 61.0);
    EXPECT_EQ(aggregate(rows_for("one sample t-test", {"17"})).record->n, 17.0);
    const auto chisq = aggregate(rows_for("Chi-square", {"10", "10", "10"}));
    EXPECT_EQ(chisq.record->rows, 3);
    EXPECT_EQ(chisq.record->cols, 2);
    EXPECT_FALSE(chisq.record->groups);
}

TEST(Aggregate, FirstValueFollowsDocumentOrder) {
    auto two = rows_for("Wilcoxon signed rank", {"8"});
    two[0].row_index = 3;
    EXPECT_EQ(aggregate(two).record->n, 8.0);
    // rows handed over out of order are re-sorted before "first" is taken
    auto shuffled = rows_for("ANOVA", {"4", "5", "6"});
    shuffled[0].group_description = "first";
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(aggregate(shuffled).record->group_description, "first");
}

TEST(Aggregate, DropsSmallSamples) {
    for (const char* v : {"1", "0.5"}) {
        const auto out = aggregate(rows_for("Wilcoxon signed rank", {v}));
        EXPECT_FALSE(out.record);
        ASSERT_EQ(out.drops.size(), 1u);
        EXPECT_EQ(out.drops[0].reason, reason::kSampleSize);
    }
    const auto zero = aggregate(rows_for("t-test", {"0"}));
    EXPECT_FALSE(zero.record);
    ASSERT_EQ(zero.drops.size(), 1u);
    EXPECT_EQ(zero.drops[0].reason, reason::kZeroSampleSize);
}

TEST(Aggregate, RowLevelDropsKeepTheRest) {
    const auto out = aggregate(rows_for("t-test", {"abc", "0", "40", "-3"}));
    ASSERT_TRUE(out.record);
    EXPECT_EQ(out.record->n, 40.0);
    EXPECT_EQ(out.record->source_rows, 1u);
    ASSERT_EQ(out.drops.size(), 3u);
    EXPECT_EQ(out.drops[0].reason, reason::kValueParse);
    EXPECT_EQ(out.drops[1].reason, reason::kZeroSampleSize);
    EXPECT_EQ(out.drops[2].reason, reason::kValueParse);
}

TEST(Aggregate, PValueAndMethodDropsTakeAllRows) {
    auto out = aggregate(rows_for("t-test", {"4", "5"}, "NS"));
    ASSERT_EQ(out.drops.size(), 1u);
    EXPECT_EQ(out.drops[0].reason, reason::kPValue);
    EXPECT_EQ(out.drops[0].rows, 2u);
    out = aggregate(rows_for("Fisher exact", {"4", "5"}));
    ASSERT_EQ(out.drops.size(), 1u);
    EXPECT_EQ(out.drops[0].reason, reason::kMethod);
    EXPECT_EQ(out.drops[0].rows, 2u);
}

TEST(Aggregate, OneSidedDoublingHappensAfterStandardizing) {
    const auto out = aggregate(rows_for("1-sided t-test, paired", {"30"}, "<0.02"));
    ASSERT_TRUE(out.record);
    EXPECT_EQ(out.record->p, 0.04);
    EXPECT_TRUE(out.record->has_less_than);
    EXPECT_TRUE(out.record->one_sided_adjusted);
}

// model mapping

TEST(MapModel, Dimensions) {
    EXPECT_EQ(map_model(Method::Logistic, std::nullopt)->q, 1);
    EXPECT_EQ(map_model(Method::Logistic, std::nullopt)->model, "logistic_regression");
    EXPECT_EQ(map_model(Method::KruskalWallis, 5)->q, 4);
    EXPECT_EQ(map_model(Method::Anova, 2)->q, 1);
    for (Method m : {Method::OneSampleT, Method::TwoSampleT, Method::LinearRegression, Method::ConditionalLogistic,
                     Method::MannWhitney, Method::WilcoxonSignedRank}) {
        EXPECT_EQ(map_model(m, std::nullopt)->q, 1) << to_label(m);
    }
}

TEST(MapModel, ExclusionsAndMissingGroups) {
    MappingFailure why{};
    for (Method m : {Method::ChiSquared, Method::Cox, Method::Logrank, Method::RepeatedMeasures}) {
        EXPECT_FALSE(map_model(m, 3, &why)) << to_label(m);
        EXPECT_EQ(why, MappingFailure::Excluded);
    }
    EXPECT_FALSE(map_model(Method::Anova, std::nullopt, &why));
    EXPECT_EQ(why, MappingFailure::MissingGroups);
    EXPECT_FALSE(map_model(Method::KruskalWallis, 1, &why));
    EXPECT_EQ(why, MappingFailure::MissingGroups);
}

TEST(Finalize, ChisqRecordIsDropped) {
    auto out = aggregate(rows_for("Chi-squared", {"50", "50"}));
    ASSERT_TRUE(out.record);
    const auto drop = finalize(*out.record);
    ASSERT_TRUE(drop);
    EXPECT_EQ(drop->reason, reason::kModelExcluded);
    EXPECT_EQ(drop->rows, 2u);
    EXPECT_EQ(drop->detail, "chisq n=100 R=2 C=2");
}

// whole pipeline on the fixture

TEST(Ingest, FixtureRecords) {
    const auto result = ingest(fixture());
    ASSERT_EQ(result.records.size(), 10u);

    auto check = [&](const char* nct, const char* method, const char* label, double p, double n, int q) {
        const auto* r = find_by_title_and_method(result, nct, method);
        ASSERT_NE(r, nullptr) << nct << " " << method;
        EXPECT_EQ(to_label(r->method), label) << method;
        EXPECT_EQ(r->p, p) << method;
        EXPECT_EQ(r->n, n) << method;
        EXPECT_EQ(r->q, q) << method;
        EXPECT_DOUBLE_EQ(r->ejab01, ejab::ejab01(p, n, q)) << method;
    };
    check("NCT90000001", "t-test, 2 sided", "2-ttest", 0.0031, 118, 1);
    check("NCT90000001", "ANOVA", "ANOVA", 0.02, 36, 2);
    check("NCT90000001", "One-sided t-test, one sample", "1-ttest", 0.06, 10, 1);
    check("NCT90000002", "Regression, Logistic", "glm", 0.009, 200, 1);
    check("NCT90000002", "Mann-Whitney U", "Utest", 0.001, 45, 1);
    check("NCT90000003", "Kruskal-Wallis", "Htest", 0.0004, 150, 4);
    check("NCT90000003", "Conditional logistic regression", "clogit", 0.049, 25, 1);
    check("NCT90000003", "Linear Regression", "lm", 0.5, 30, 1);
    check("NCT90000003", "Wilcoxon rank-sum", "Utest", 0.02, 45, 1);
    check("NCT90000003", "Regression, Linear", "lm", 0.012, 33, 1);

    const auto* utest = find_by_title_and_method(result, "NCT90000002", "Mann-Whitney U");
    EXPECT_TRUE(utest->has_less_than);
    EXPECT_EQ(utest->group_description, "Standard care");
    const auto* one = find_by_title_and_method(result, "NCT90000001", "One-sided t-test, one sample");
    EXPECT_TRUE(one->one_sided_adjusted);
    const auto* h = find_by_title_and_method(result, "NCT90000003", "Kruskal-Wallis");
    EXPECT_EQ(h->groups, 5);
    EXPECT_EQ(h->model, "kruskal_wallis");
}

TEST(Ingest, FixtureDrops) {
    const auto result = ingest(fixture());
    EXPECT_EQ(count_reason(result, reason::kPValue), 2u);
    EXPECT_EQ(count_reason(result, reason::kMethod), 2u);
    EXPECT_EQ(count_reason(result, reason::kQcMultiRow), 1u);
    EXPECT_EQ(count_reason(result, reason::kModelExcluded), 5u);
    EXPECT_EQ(count_reason(result, reason::kDesignParams), 1u);
    EXPECT_EQ(count_reason(result, reason::kSampleSize), 1u);
    EXPECT_EQ(count_reason(result, reason::kZeroSampleSize), 1u);
    EXPECT_EQ(count_reason(result, reason::kValueParse), 1u);
    const auto cox = std::find_if(result.drops.begin(), result.drops.end(),
                                  [](const Drop& d) { return d.detail == "cox n=100"; });
    EXPECT_NE(cox, result.drops.end());
}

TEST(Ingest, EveryRowIsAccountedFor) {
    const auto result = ingest(fixture());
    EXPECT_EQ(result.input_rows, 43u);
    EXPECT_EQ(result.rows_in_records(), 20u);
    EXPECT_EQ(result.input_rows, result.rows_in_records() + result.rows_dropped());
}

TEST(Ingest, RecordInvariants) {
    const auto result = ingest(fixture());
    for (const auto& r : result.records) {
        EXPECT_GT(r.p, 0.0);
        EXPECT_LE(r.p, 1.0);
        EXPECT_GE(r.n, 2.0);
        EXPECT_GE(r.q, 1);
        EXPECT_EQ(r.analysis_id.size(), 32u);
        EXPECT_FALSE(r.model.empty());
    }
    EXPECT_TRUE(std::is_sorted(result.records.begin(), result.records.end(),
                               [](const auto& a, const auto& b) { return a.analysis_id < b.analysis_id; }));
    for (const auto& d : result.drops) EXPECT_FALSE(d.reason.empty());
}

TEST(Ingest, DeterministicAndOrderIndependent) {
    json doc = fixture();
    std::stringstream a, b, c;
    write_jsonl(a, ingest(doc).records);
    write_jsonl(b, ingest(doc).records);
    EXPECT_EQ(a.str(), b.str());
    // studies in a different order: same ids, same records
    std::reverse(doc.begin(), doc.end());
    write_jsonl(c, ingest(doc).records);
    EXPECT_EQ(a.str(), c.str());
}

TEST(RecordIo, JsonlRoundTripIsBitExact) {
    auto records = ingest(fixture()).records;
    // awkward doubles too
    AnalysisRecord extra = records.front();
    extra.analysis_id = "ffffffffffffffffffffffffffffffff";
    extra.p = 0.1 + 0.2;
    extra.n = 1.0 / 3.0 * 300.0;
    extra.ejab01 = 5e-324;
    extra.groups = 7;
    records.push_back(extra);

    std::stringstream out;
    write_jsonl(out, records);
    std::stringstream in(out.str());
    const auto back = read_jsonl(in);
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(std::memcmp(&back[i].p, &records[i].p, sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(&back[i].n, &records[i].n, sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(&back[i].ejab01, &records[i].ejab01, sizeof(double)), 0);
        EXPECT_EQ(back[i].q, records[i].q);
        EXPECT_EQ(back[i].groups, records[i].groups);
        EXPECT_EQ(back[i].method, records[i].method);
        EXPECT_EQ(back[i].study.condition_ids, records[i].study.condition_ids);
        EXPECT_EQ(back[i].analysis_id, records[i].analysis_id);
    }
    std::stringstream again;
    write_jsonl(again, back);
    EXPECT_EQ(again.str(), out.str());
}

TEST(RecordIo, BadLinesReportLineNumber) {
    std::stringstream in("\n{\"analysisId\": \"x\"}\n");
    try {
        read_jsonl(in);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Golden, FixtureMatchesCheckedInOutput) {
    const auto result = ingest(fixture());
    std::stringstream records, drops;
    write_jsonl(records, result.records);
    write_drop_log(drops, result.drops);
    EXPECT_EQ(records.str(), read_file(std::string(EJAB_TEST_DATA_DIR) + "/ctg_expected.jsonl"));
    EXPECT_EQ(drops.str(), read_file(std::string(EJAB_TEST_DATA_DIR) + "/ctg_expected_drops.csv"));
}
