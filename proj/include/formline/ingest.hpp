#pragma once

#include <string>
#include <vector>

#include "formline/types.hpp"

namespace formline {

// Column layout of a football-data.co.uk style CSV.
struct CsvSchema {
    std::string date_col = "Date";
    std::string home_col = "HomeTeam";
    std::string away_col = "AwayTeam";
    std::string home_goals_col = "FTHG";
    std::string away_goals_col = "FTAG";
    std::string odds_home_col = "WHH";
    std::string odds_draw_col = "WHD";
    std::string odds_away_col = "WHA";
    std::string season_col = "Season";  // optional; used when present in the header
};

struct ParseIssue {
    int line = 0;  // 1-based line number in the source file
    std::string message;
};

struct ParseOptions {
    CsvSchema schema;
    int goal_cap = 4;
    bool strict = true;  // strict: throw on first bad row; lenient: skip and report
};

struct ParseResult {
    std::vector<MatchRecord> records;
    std::vector<std::string> team_names;  // id -> name, first-appearance order
    std::vector<ParseIssue> issues;       // populated in lenient mode
};

// One MatchRecord per data row. Goals capped at goal_cap with raw values kept;
// odds absent unless all three parse to values > 1.
ParseResult parse_matches(const std::string& csv_text, const ParseOptions& options);

struct BucketOptions {
    int season_gap_days = 45;
    bool strict = false;  // strict: error on double-fixture weeks instead of splitting
};

// Buckets records into consecutive 7-day windows anchored at the earliest
// date, eliding empty windows. A bucket in which some team would appear twice
// is split at the second fixture's date. Boundaries are between-season when
// the calendar gap exceeds season_gap_days or the season id changes.
Schedule bucket_weeks(const std::vector<MatchRecord>& records,
                      const std::vector<std::string>& team_names,
                      const BucketOptions& options = {});

// Normalized inverse odds (proportional overround removal). Throws if any
// component is <= 1.
PredictionTriple implied_probabilities(const std::array<double, 3>& odds);

// Canonical match CSV in the default schema (plus a Season column when any
// record carries one).
std::string to_canonical_csv(const std::vector<MatchRecord>& records,
                             const std::vector<std::string>& team_names);

// JSON sidecar: team-id <-> name map and week-id -> date range.
std::string sidecar_json(const Schedule& schedule);

}  // namespace formline
