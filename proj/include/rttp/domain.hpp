#pragma once

// Core data model shared by the whole pipeline: creators, posts, engagement
// events, query signals and ranked trend candidates, plus the canonical
// query normalization every module keys on. All types are immutable value
// objects once constructed and safe to share across threads.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#ifdef RTTP_HAVE_ICU
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#endif

namespace rttp {

enum class EngagementKind { reaction, comment, reshare, click };

inline constexpr EngagementKind kAllEngagementKinds[] = {
    EngagementKind::reaction, EngagementKind::comment,
    EngagementKind::reshare, EngagementKind::click};

inline std::string to_string(EngagementKind k) {
    switch (k) {
        case EngagementKind::reaction: return "reaction";
        case EngagementKind::comment: return "comment";
        case EngagementKind::reshare: return "reshare";
        case EngagementKind::click: return "click";
    }
    throw std::invalid_argument("unknown engagement kind");
}

inline EngagementKind engagement_kind_from_string(std::string_view s) {
    if (s == "reaction") return EngagementKind::reaction;
    if (s == "comment") return EngagementKind::comment;
    if (s == "reshare") return EngagementKind::reshare;
    if (s == "click") return EngagementKind::click;
    throw std::invalid_argument("unknown engagement kind: " + std::string(s));
}

struct AuthoritySignal {
    std::string signal_name;
    double value = 0.0;  // >= 0
};

struct Creator {
    std::string creator_id;
    std::uint64_t follower_count = 0;
    std::vector<AuthoritySignal> authority_signals;

    void validate() const {
        if (creator_id.empty()) throw std::invalid_argument("creator_id must be non-empty");
        for (const auto& s : authority_signals) {
            if (!(s.value >= 0.0)) throw std::invalid_argument("authority signal value must be >= 0");
        }
    }
};

struct Post {
    std::string post_id;
    std::string creator_id;
    std::string title;
    std::string body;
    std::int64_t created_at = 0;  // epoch seconds UTC
    std::set<std::string> ground_truth_queries;  // normalized; empty outside eval/training data

    void validate() const;
};

struct EngagementEvent {
    std::string post_id;
    EngagementKind kind = EngagementKind::reaction;
    std::int64_t occurred_at = 0;
    std::string actor_id;
    // occurred_at >= referenced post's created_at is enforced where the post
    // is resolvable (pipeline ingest).
};

struct Location {
    std::string country;
    std::optional<std::string> state;
};

struct GeneratedQuery {
    std::string post_id;
    std::string text;        // normalized
    std::uint32_t rank = 1;  // 1-based, consecutive within a (post, generator) batch
    std::optional<Location> location;
    std::string generator_id;
};

struct SearchLogEntry {
    std::string query;  // normalized
    std::int64_t occurred_at = 0;
    std::optional<std::string> engaged_post_id;
};

enum class CandidateSource { organic, generated, both };

inline std::string to_string(CandidateSource s) {
    switch (s) {
        case CandidateSource::organic: return "organic";
        case CandidateSource::generated: return "generated";
        case CandidateSource::both: return "both";
    }
    throw std::invalid_argument("unknown candidate source");
}

inline CandidateSource candidate_source_from_string(std::string_view s) {
    if (s == "organic") return CandidateSource::organic;
    if (s == "generated") return CandidateSource::generated;
    if (s == "both") return CandidateSource::both;
    throw std::invalid_argument("unknown candidate source: " + std::string(s));
}

struct TrendCandidate {
    std::string query;
    std::int64_t window_start = 0;
    std::int64_t window_length = 0;  // seconds
    double score = 0.0;
    std::uint64_t search_volume = 0;
    std::vector<std::string> supporting_posts;  // non-empty when source includes generated
    CandidateSource source = CandidateSource::organic;
};

// --------------------------------------------------------------------------
// Query normalization.
//
// The pipeline's single query-identity notion: two queries are the same
// trend iff their normalized forms are byte-equal. The normal form is
// NFKC-folded, lowercased text with punctuation stripped (intra-word
// apostrophes and hyphens survive) and whitespace collapsed. Idempotent.
// --------------------------------------------------------------------------

namespace detail {

inline bool is_apostrophe_cp(char32_t c) {
    return c == U'\'' || c == U'’';
}

inline bool is_hyphen_cp(char32_t c) {
    return c == U'-' || c == U'‐' || c == U'‑';
}

#ifdef RTTP_HAVE_ICU

inline const icu::Normalizer2& nfkc() {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(ec);
    if (U_FAILURE(ec) || n == nullptr) throw std::runtime_error("ICU NFKC unavailable");
    return *n;
}

inline std::string normalize_query_impl(std::string_view raw) {
    UErrorCode ec = U_ZERO_ERROR;
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    u = nfkc().normalize(u, ec);
    u.toLower(icu::Locale::getRoot());
    u = nfkc().normalize(u, ec);
    if (U_FAILURE(ec)) throw std::runtime_error("ICU normalization failed");

    // Keep alphanumerics, apostrophes, hyphens; unify whitespace.
    std::vector<char32_t> kept;
    kept.reserve(static_cast<std::size_t>(u.countChar32()));
    for (int32_t i = 0; i < u.length();) {
        const UChar32 c = u.char32At(i);
        i += U16_LENGTH(c);
        if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC) || u_isdigit(c)) {
            kept.push_back(static_cast<char32_t>(c));
        } else if (u_isUWhiteSpace(c)) {
            kept.push_back(U' ');
        } else if (is_apostrophe_cp(static_cast<char32_t>(c))) {
            kept.push_back(U'\'');
        } else if (is_hyphen_cp(static_cast<char32_t>(c))) {
            kept.push_back(U'-');
        }
        // everything else (punctuation, symbols, orphaned marks) is dropped
    }

    auto is_word_cp = [](char32_t c) {
        return c != U' ' && c != U'\'' && c != U'-';
    };

    // Apostrophes/hyphens survive only between word characters; the check
    // runs against the pre-removal sequence so the rule is order-free.
    icu::UnicodeString filtered;
    bool prev_space = true;  // doubles as leading trim
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const char32_t c = kept[i];
        if (c == U' ') {
            if (!prev_space) filtered.append(static_cast<UChar32>(U' '));
            prev_space = true;
            continue;
        }
        if (c == U'\'' || c == U'-') {
            const bool word_before = i > 0 && is_word_cp(kept[i - 1]);
            const bool word_after = i + 1 < kept.size() && is_word_cp(kept[i + 1]);
            if (!(word_before && word_after)) continue;
        }
        filtered.append(static_cast<UChar32>(c));
        prev_space = false;
    }
    // trailing space (a trailing ' or - cannot occur: it would need a word char after it)
    if (filtered.length() > 0 && filtered.char32At(filtered.length() - 1) == U' ') {
        filtered.truncate(filtered.length() - 1);
    }

    // Character removal can create fresh composition opportunities
    // (e.g. conjoining jamo separated by stripped punctuation).
    filtered = nfkc().normalize(filtered, ec);
    if (U_FAILURE(ec)) throw std::runtime_error("ICU normalization failed");

    bool has_alnum = false;
    for (int32_t i = 0; i < filtered.length();) {
        const UChar32 c = filtered.char32At(i);
        i += U16_LENGTH(c);
        if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC) || u_isdigit(c)) {
            has_alnum = true;
            break;
        }
    }
    if (!has_alnum) return {};

    std::string out;
    filtered.toUTF8String(out);
    return out;
}

#else  // !RTTP_HAVE_ICU

// Reduced fallback: full rules for ASCII, non-ASCII codepoints are passed
// through untouched and treated as word characters. Still idempotent.
inline std::string normalize_query_impl(std::string_view raw) {
    std::vector<std::string> kept;  // one UTF-8 codepoint (or mapped char) per slot
    auto push1 = [&](char c) { kept.emplace_back(1, c); };
    for (std::size_t i = 0; i < raw.size();) {
        const unsigned char b = static_cast<unsigned char>(raw[i]);
        if (b < 0x80) {
            const char c = static_cast<char>(b);
            if (std::isalnum(b)) {
                push1(static_cast<char>(std::tolower(b)));
            } else if (std::isspace(b)) {
                push1(' ');
            } else if (c == '\'' || c == '-') {
                push1(c);
            }
            ++i;
        } else {
            std::size_t len = 1;
            if ((b & 0xE0) == 0xC0) len = 2;
            else if ((b & 0xF0) == 0xE0) len = 3;
            else if ((b & 0xF8) == 0xF0) len = 4;
            len = std::min(len, raw.size() - i);
            kept.emplace_back(raw.substr(i, len));
            i += len;
        }
    }

    auto is_word = [](const std::string& s) {
        return s != " " && s != "'" && s != "-";
    };

    std::string out;
    bool prev_space = true;
    bool any_alnum = false;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const std::string& s = kept[i];
        if (s == " ") {
            if (!prev_space) out += ' ';
            prev_space = true;
            continue;
        }
        if (s == "'" || s == "-") {
            const bool wb = i > 0 && is_word(kept[i - 1]);
            const bool wa = i + 1 < kept.size() && is_word(kept[i + 1]);
            if (!(wb && wa)) continue;
        } else {
            any_alnum = true;
        }
        out += s;
        prev_space = false;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    if (!any_alnum) return {};
    return out;
}

#endif  // RTTP_HAVE_ICU

}  // namespace detail

// Canonical form of a raw query / title fragment. Returns "" when the input
// carries no letters or digits; callers treat empty as "no query".
inline std::string normalize_query(std::string_view raw) {
    return detail::normalize_query_impl(raw);
}

inline bool is_normalized_query(std::string_view q) {
    return !q.empty() && normalize_query(q) == q;
}

inline void Post::validate() const {
    if (post_id.empty()) throw std::invalid_argument("post_id must be non-empty");
    if (created_at <= 0) throw std::invalid_argument("created_at must be > 0");
    for (const auto& q : ground_truth_queries) {
        if (!is_normalized_query(q))
            throw std::invalid_argument("ground_truth_queries must be normalized: " + q);
    }
}

}  // namespace rttp
