#ifndef CMATCH_PARSE_HPP
#define CMATCH_PARSE_HPP

// Line-oriented market description format:
//
//   doctors: d1 d2
//   hospitals: h1 h2
//   contract x1 = (d1, h1)
//   hospital h1 : x2 > x1      # acceptable contracts, best first
//   doctor d1 : x1 > x2        # optional truthful profile
//
// '#' starts a comment. Every hospital needs a 'hospital' line (the ranking
// may be empty). Doctor lines are optional, but if any is present all
// doctors must have one.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "market.hpp"

namespace cmatch {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct ParsedMarket {
    Market market;
    std::optional<Profile> profile;
};

namespace detail {

struct Token {
    std::string text;
    std::size_t column = 0;  // 1-based
};

class LineCursor {
public:
    LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    std::size_t column() const { return pos_ + 1; }

    bool peek(char c) {
        skip_space();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    Token word(const char* what) {
        skip_space();
        Token t{{}, column()};
        while (pos_ < text_.size() && is_word_char(text_[pos_])) t.text.push_back(text_[pos_++]);
        if (t.text.empty()) fail(std::string("expected ") + what);
        return t;
    }

    /// Zero or more words separated by '>' up to end of line.
    std::vector<Token> ranking() {
        std::vector<Token> out;
        if (at_end()) return out;
        out.push_back(word("contract id"));
        while (!at_end()) {
            expect('>');
            out.push_back(word("contract id"));
        }
        return out;
    }

    std::vector<Token> words_to_end(const char* what) {
        std::vector<Token> out;
        while (!at_end()) out.push_back(word(what));
        return out;
    }

    void expect_end() {
        if (!at_end()) fail("unexpected trailing input");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, column(), msg); }

    std::size_t line() const { return line_; }

private:
    static bool is_word_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

struct RankingLine {
    Token agent;
    std::vector<Token> ranking;
    std::size_t line;
};

struct ContractLine {
    Token id, doctor, hospital;
    std::size_t line;
};

}  // namespace detail

/// Parses `text` as a ranking of `d`'s contracts ("x1 > x2", or empty).
inline DoctorPreference parse_ranking(const Market& m, DoctorIx d, std::string_view text) {
    detail::LineCursor cur(text, 1);
    DoctorPreference p{d, {}};
    for (const auto& t : cur.ranking()) {
        auto c = m.find_contract(t.text);
        if (!c) throw ParseError(1, t.column, "unknown contract: " + t.text);
        p.order.push_back(*c);
    }
    try {
        m.validate(p);
    } catch (const std::invalid_argument& e) {
        throw ParseError(1, 1, e.what());
    }
    return p;
}

inline ParsedMarket parse_market(std::string_view text) {
    using detail::Token;
    std::optional<std::pair<std::vector<Token>, std::size_t>> doctor_roster, hospital_roster;
    std::vector<detail::ContractLine> contract_lines;
    std::vector<detail::RankingLine> hospital_lines, doctor_lines;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        detail::LineCursor cur(line, line_no);
        if (cur.at_end()) continue;
        Token kw = cur.word("keyword");
        if (kw.text == "doctors" || kw.text == "hospitals") {
            auto& roster = kw.text == "doctors" ? doctor_roster : hospital_roster;
            if (roster) throw ParseError(line_no, kw.column, "duplicate '" + kw.text + "' line");
            cur.expect(':');
            roster.emplace(cur.words_to_end("agent id"), line_no);
        } else if (kw.text == "contract") {
            detail::ContractLine c;
            c.line = line_no;
            c.id = cur.word("contract id");
            cur.expect('=');
            cur.expect('(');
            c.doctor = cur.word("doctor id");
            cur.expect(',');
            c.hospital = cur.word("hospital id");
            cur.expect(')');
            cur.expect_end();
            contract_lines.push_back(std::move(c));
        } else if (kw.text == "hospital" || kw.text == "doctor") {
            detail::RankingLine r;
            r.line = line_no;
            r.agent = cur.word("agent id");
            cur.expect(':');
            r.ranking = cur.ranking();
            (kw.text == "hospital" ? hospital_lines : doctor_lines).push_back(std::move(r));
        } else {
            throw ParseError(line_no, kw.column, "unknown statement '" + kw.text + "'");
        }
    }

    auto names = [](const auto& roster) {
        std::vector<std::string> out;
        if (roster)
            for (const auto& t : roster->first) out.push_back(t.text);
        return out;
    };
    auto check_roster = [](const auto& roster) {
        if (!roster) return;
        for (std::size_t i = 0; i < roster->first.size(); ++i) {
            const auto& t = roster->first[i];
            for (std::size_t j = 0; j < i; ++j)
                if (roster->first[j].text == t.text)
                    throw ParseError(roster->second, t.column, "duplicate agent id: " + t.text);
        }
    };
    check_roster(doctor_roster);
    check_roster(hospital_roster);
    std::vector<std::string> doctors = names(doctor_roster);
    std::vector<std::string> hospitals = names(hospital_roster);

    auto find_in = [](const std::vector<std::string>& roster, const Token& t, std::size_t line,
                      const char* what) -> std::size_t {
        for (std::size_t i = 0; i < roster.size(); ++i)
            if (roster[i] == t.text) return i;
        throw ParseError(line, t.column, std::string("unknown ") + what + ": " + t.text);
    };

    std::vector<Contract> contracts;
    for (const auto& c : contract_lines) {
        for (const auto& prev : contracts)
            if (prev.id == c.id.text) throw ParseError(c.line, c.id.column, "duplicate contract id: " + c.id.text);
        if (std::find(doctors.begin(), doctors.end(), c.id.text) != doctors.end() ||
            std::find(hospitals.begin(), hospitals.end(), c.id.text) != hospitals.end())
            throw ParseError(c.line, c.id.column, "contract id clashes with an agent id: " + c.id.text);
        contracts.push_back(Contract{c.id.text, make_ix<DoctorIx>(find_in(doctors, c.doctor, c.line, "doctor")),
                                     make_ix<HospitalIx>(find_in(hospitals, c.hospital, c.line, "hospital"))});
    }

    auto resolve_ranking = [&](const detail::RankingLine& r, auto owner_matches, const char* owner_kind) {
        std::vector<ContractIx> order;
        for (const auto& t : r.ranking) {
            std::size_t ci = contracts.size();
            for (std::size_t i = 0; i < contracts.size(); ++i)
                if (contracts[i].id == t.text) ci = i;
            if (ci == contracts.size()) throw ParseError(r.line, t.column, "unknown contract: " + t.text);
            if (!owner_matches(contracts[ci]))
                throw ParseError(r.line, t.column,
                                 "contract " + t.text + " does not involve " + owner_kind + " " + r.agent.text);
            if (std::find(order.begin(), order.end(), make_ix<ContractIx>(ci)) != order.end())
                throw ParseError(r.line, t.column, "contract ranked twice: " + t.text);
            order.push_back(make_ix<ContractIx>(ci));
        }
        return order;
    };

    std::vector<std::optional<HospitalPreference>> hprefs(hospitals.size());
    for (const auto& r : hospital_lines) {
        auto h = find_in(hospitals, r.agent, r.line, "hospital");
        if (hprefs[h]) throw ParseError(r.line, r.agent.column, "duplicate hospital line for " + r.agent.text);
        hprefs[h] = HospitalPreference{
            make_ix<HospitalIx>(h),
            resolve_ranking(r, [&](const Contract& c) { return idx(c.hospital) == h; }, "hospital")};
    }
    std::vector<HospitalPreference> hospital_prefs;
    for (std::size_t h = 0; h < hospitals.size(); ++h) {
        if (!hprefs[h]) {
            std::size_t line = hospital_roster ? hospital_roster->second : 1;
            throw ParseError(line, 1, "missing 'hospital' line for " + hospitals[h]);
        }
        hospital_prefs.push_back(std::move(*hprefs[h]));
    }

    // With no doctors the (empty) profile is always complete.
    std::optional<Profile> profile;
    if (doctors.empty()) profile.emplace();
    if (!doctor_lines.empty()) {
        std::vector<std::optional<DoctorPreference>> dprefs(doctors.size());
        for (const auto& r : doctor_lines) {
            auto d = find_in(doctors, r.agent, r.line, "doctor");
            if (dprefs[d]) throw ParseError(r.line, r.agent.column, "duplicate doctor line for " + r.agent.text);
            dprefs[d] = DoctorPreference{
                make_ix<DoctorIx>(d), resolve_ranking(r, [&](const Contract& c) { return idx(c.doctor) == d; }, "doctor")};
        }
        profile.emplace();
        for (std::size_t d = 0; d < doctors.size(); ++d) {
            if (!dprefs[d])
                throw ParseError(doctor_lines.front().line, 1, "doctor lines present but none for " + doctors[d]);
            profile->prefs.push_back(std::move(*dprefs[d]));
        }
    }

    try {
        return ParsedMarket{Market(std::move(doctors), std::move(hospitals), std::move(contracts),
                                   std::move(hospital_prefs)),
                            std::move(profile)};
    } catch (const std::invalid_argument& e) {
        throw ParseError(1, 1, e.what());
    }
}

template <class Owner>
std::string format_ranking(const Market& m, const Ranking<Owner>& p) {
    std::string out;
    for (std::size_t i = 0; i < p.order.size(); ++i) {
        if (i) out += " > ";
        out += m.name(p.order[i]);
    }
    return out;
}

inline std::string format_outcome(const Market& m, Outcome o) { return o ? m.name(*o) : std::string("-"); }

inline std::string format_allocation(const Market& m, const Allocation& y) {
    std::string out = "{";
    for (std::size_t i = 0; i < y.contracts.size(); ++i) {
        if (i) out += ",";
        out += m.name(y.contracts[i]);
    }
    return out + "}";
}

/// Canonical text form; parse_market(serialize_market(m, p)) reproduces m and p.
inline std::string serialize_market(const Market& m, const std::optional<Profile>& profile = std::nullopt) {
    std::ostringstream os;
    os << "doctors:";
    for (const auto& d : m.doctors()) os << ' ' << d;
    os << "\nhospitals:";
    for (const auto& h : m.hospitals()) os << ' ' << h;
    os << '\n';
    for (const auto& c : m.contracts())
        os << "contract " << c.id << " = (" << m.name(c.doctor) << ", " << m.name(c.hospital) << ")\n";
    auto line = [&](const char* kind, const auto& p) {
        os << kind << ' ' << m.name(p.owner) << " :";
        if (!p.order.empty()) os << ' ' << format_ranking(m, p);
        os << '\n';
    };
    for (const auto& p : m.hospital_prefs()) line("hospital", p);
    if (profile)
        for (const auto& p : profile->prefs) line("doctor", p);
    return os.str();
}

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
inline std::string market_digest(const Market& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_market(m)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    return out;
}

}  // namespace cmatch

#endif  // CMATCH_PARSE_HPP
