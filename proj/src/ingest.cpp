#include "formline/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "formline/csv.hpp"

namespace formline {

namespace {

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_int_strict(const std::string& s, int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

ParseResult parse_matches(const std::string& csv_text, const ParseOptions& options) {
    csv::Table table = csv::read(csv_text);
    if (table.header.empty()) throw std::runtime_error("CSV has no header row");

    const CsvSchema& s = options.schema;
    auto require = [&](const std::string& name) {
        int c = table.column(name);
        if (c < 0) throw std::runtime_error("required column missing: " + name);
        return c;
    };
    const int c_date = require(s.date_col);
    const int c_home = require(s.home_col);
    const int c_away = require(s.away_col);
    const int c_hg = require(s.home_goals_col);
    const int c_ag = require(s.away_goals_col);
    const int c_oh = table.column(s.odds_home_col);
    const int c_od = table.column(s.odds_draw_col);
    const int c_oa = table.column(s.odds_away_col);
    const int c_season = table.column(s.season_col);

    ParseResult result;
    std::unordered_map<std::string, int> team_ids;
    auto team_id = [&](const std::string& name) {
        auto it = team_ids.find(name);
        if (it != team_ids.end()) return it->second;
        int id = static_cast<int>(result.team_names.size());
        team_ids.emplace(name, id);
        result.team_names.push_back(name);
        return id;
    };

    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const int line = static_cast<int>(r) + 2;  // after the header row
        auto fail = [&](const std::string& msg) {
            std::string full = "line " + std::to_string(line) + ": " + msg;
            if (options.strict) throw std::runtime_error(full);
            result.issues.push_back({line, msg});
        };
        auto field = [&](int col) -> std::string {
            return col >= 0 && col < static_cast<int>(row.size()) ? row[col] : std::string();
        };

        // Rows that are entirely empty (trailing filler) are skipped silently.
        bool all_empty = true;
        for (const auto& f : row)
            if (!f.empty()) { all_empty = false; break; }
        if (all_empty) continue;

        MatchRecord m;
        try {
            m.date = parse_date(field(c_date));
        } catch (const std::exception& e) {
            fail(e.what());
            continue;
        }
        const std::string home_name = field(c_home);
        const std::string away_name = field(c_away);
        if (home_name.empty() || away_name.empty()) {
            fail("missing team name");
            continue;
        }
        if (home_name == away_name) {
            fail("home and away teams are identical: " + home_name);
            continue;
        }
        int hg = 0, ag = 0;
        if (!parse_int_strict(field(c_hg), hg) || hg < 0) {
            fail("non-integer home goals: '" + field(c_hg) + "'");
            continue;
        }
        if (!parse_int_strict(field(c_ag), ag) || ag < 0) {
            fail("non-integer away goals: '" + field(c_ag) + "'");
            continue;
        }
        m.home = team_id(home_name);
        m.away = team_id(away_name);
        m.raw_home_goals = hg;
        m.raw_away_goals = ag;
        m.home_goals = std::min(hg, options.goal_cap);
        m.away_goals = std::min(ag, options.goal_cap);
        if (c_oh >= 0 && c_od >= 0 && c_oa >= 0) {
            double oh, od, oa;
            if (parse_double(field(c_oh), oh) && parse_double(field(c_od), od) &&
                parse_double(field(c_oa), oa) && oh > 1.0 && od > 1.0 && oa > 1.0) {
                m.odds = {oh, od, oa};
            }
        }
        if (c_season >= 0) m.season = field(c_season);
        result.records.push_back(m);
    }
    return result;
}

Schedule bucket_weeks(const std::vector<MatchRecord>& records,
                      const std::vector<std::string>& team_names,
                      const BucketOptions& options) {
    if (records.empty()) throw std::runtime_error("bucket_weeks: no records");

    std::vector<MatchRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const MatchRecord& a, const MatchRecord& b) { return a.date < b.date; });

    // Duplicate fixture detection.
    {
        std::set<std::tuple<int, int, long>> seen;
        for (const auto& m : sorted) {
            if (!seen.insert({m.home, m.away, m.date.serial()}).second)
                throw std::runtime_error("duplicate fixture (home=" + std::to_string(m.home) +
                                         ", away=" + std::to_string(m.away) + ", date=" +
                                         m.date.iso() + ")");
        }
    }

    // Initial 7-day windows anchored at the earliest date; empty windows elided
    // by construction since we iterate over matches.
    const long anchor = sorted.front().date.serial();
    std::map<long, std::vector<MatchRecord>> windows;  // window start serial -> matches
    for (const auto& m : sorted) {
        long k = (m.date.serial() - anchor) / 7;
        windows[anchor + 7 * k].push_back(m);
    }

    // Split buckets in which a team appears twice, at the second fixture's
    // date: matches dated strictly before it stay, the rest form a new bucket.
    std::vector<std::vector<MatchRecord>> buckets;
    for (auto& [start, matches] : windows) {
        (void)start;
        std::vector<MatchRecord> pending = std::move(matches);
        while (!pending.empty()) {
            std::set<int> teams_seen;
            int offender = -1;
            Date split_date;
            for (const auto& m : pending) {
                if (teams_seen.count(m.home) || teams_seen.count(m.away)) {
                    offender = teams_seen.count(m.home) ? m.home : m.away;
                    split_date = m.date;
                    break;
                }
                teams_seen.insert(m.home);
                teams_seen.insert(m.away);
            }
            if (offender < 0) {
                buckets.push_back(std::move(pending));
                break;
            }
            if (options.strict)
                throw std::runtime_error("team " + std::to_string(offender) +
                                         " appears twice in week " +
                                         std::to_string(buckets.size()) + " (strict mode)");
            size_t k = 0;
            while (k < pending.size() && pending[k].date < split_date) ++k;
            if (k == 0)
                throw std::runtime_error("team " + std::to_string(offender) +
                                         " plays twice on " + split_date.iso() +
                                         "; cannot split week " + std::to_string(buckets.size()));
            buckets.emplace_back(pending.begin(), pending.begin() + k);
            pending.erase(pending.begin(), pending.begin() + k);
        }
    }

    Schedule schedule;
    schedule.team_names = team_names;
    schedule.num_teams = static_cast<int>(team_names.size());
    schedule.weeks = std::move(buckets);
    for (const auto& b : schedule.weeks) schedule.week_dates.push_back(b.front().date);

    for (size_t w = 1; w < schedule.weeks.size(); ++w) {
        const Date& prev_last = schedule.weeks[w - 1].back().date;
        const Date& next_first = schedule.weeks[w].front().date;
        bool far_apart = days_between(prev_last, next_first) > options.season_gap_days;
        const std::string& s0 = schedule.weeks[w - 1].front().season;
        const std::string& s1 = schedule.weeks[w].front().season;
        bool season_changed = !s0.empty() && !s1.empty() && s0 != s1;
        if (far_apart || season_changed) schedule.season_boundaries.insert(static_cast<int>(w));
    }

    schedule.rebuild_presence();
    auto violations = schedule.validate();
    if (!violations.empty())
        throw std::runtime_error("bucket_weeks produced invalid schedule: " + violations.front());
    return schedule;
}

PredictionTriple implied_probabilities(const std::array<double, 3>& odds) {
    double inv[3];
    for (int i = 0; i < 3; ++i) {
        if (!(odds[i] > 1.0))
            throw std::runtime_error("decimal odds must exceed 1.0, got " +
                                     std::to_string(odds[i]));
        inv[i] = 1.0 / odds[i];
    }
    double total = inv[0] + inv[1] + inv[2];
    return {inv[0] / total, inv[1] / total, inv[2] / total};
}

std::string to_canonical_csv(const std::vector<MatchRecord>& records,
                             const std::vector<std::string>& team_names) {
    bool any_season = false, any_odds = false;
    for (const auto& m : records) {
        any_season = any_season || !m.season.empty();
        any_odds = any_odds || m.odds.has_value();
    }
    std::vector<std::string> header = {"Date", "HomeTeam", "AwayTeam", "FTHG", "FTAG"};
    if (any_odds) {
        header.insert(header.end(), {"WHH", "WHD", "WHA"});
    }
    if (any_season) header.push_back("Season");
    std::string out = csv::join_row(header);
    char buf[32];
    auto fmt_odds = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    for (const auto& m : records) {
        std::vector<std::string> row;
        std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", m.date.day, m.date.month, m.date.year);
        row.push_back(buf);
        row.push_back(team_names[m.home]);
        row.push_back(team_names[m.away]);
        row.push_back(std::to_string(m.raw_home_goals));
        row.push_back(std::to_string(m.raw_away_goals));
        if (any_odds) {
            if (m.odds) {
                for (double v : *m.odds) row.push_back(fmt_odds(v));
            } else {
                row.insert(row.end(), {"", "", ""});
            }
        }
        if (any_season) row.push_back(m.season);
        out += csv::join_row(row);
    }
    return out;
}

std::string sidecar_json(const Schedule& schedule) {
    nlohmann::ordered_json j;
    for (int t = 0; t < schedule.num_teams; ++t)
        j["teams"][std::to_string(t)] = schedule.team_names[t];
    for (int w = 0; w < schedule.num_weeks(); ++w) {
        j["weeks"][std::to_string(w)] = {
            {"start", schedule.weeks[w].front().date.iso()},
            {"end", schedule.weeks[w].back().date.iso()},
        };
    }
    return j.dump(2) + "\n";
}

}  // namespace formline
