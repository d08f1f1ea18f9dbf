#include "clustval/text.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <unicode/uchar.h>

#include "clustval/error.hpp"
#include "clustval/resources.hpp"

namespace clustval {

void to_json(nlohmann::json& j, const TokenizerConfig& c) {
    j = nlohmann::json{{"emoji_to_cldr", c.emoji_to_cldr},
                       {"lowercase", c.lowercase},
                       {"strip_punctuation", c.strip_punctuation},
                       {"remove_stopwords", c.remove_stopwords},
                       {"stem", c.stem},
                       {"stopword_list_id", c.stopword_list_id}};
}

void from_json(const nlohmann::json& j, TokenizerConfig& c) {
    TokenizerConfig d;
    c.emoji_to_cldr = j.value("emoji_to_cldr", d.emoji_to_cldr);
    c.lowercase = j.value("lowercase", d.lowercase);
    c.strip_punctuation = j.value("strip_punctuation", d.strip_punctuation);
    c.remove_stopwords = j.value("remove_stopwords", d.remove_stopwords);
    c.stem = j.value("stem", d.stem);
    c.stopword_list_id = j.value("stopword_list_id", d.stopword_list_id);
}

// ---------------------------------------------------------------------------
// UTF-8

void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::u32string utf8_decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        int extra = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            cp = c & 0x1F;
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            cp = c & 0x0F;
            extra = 2;
        } else if ((c & 0xF8) == 0xF0) {
            cp = c & 0x07;
            extra = 3;
        } else {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            if (i + k >= text.size()) {
                ok = false;
                break;
            }
            auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

std::string utf8_encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) utf8_append(out, cp);
    return out;
}

// ---------------------------------------------------------------------------
// Bundled tables

void EmojiTable::add(std::u32string sequence, std::string name) {
    if (sequence.empty()) return;
    first_codepoints_.insert(sequence.front());
    max_length_ = std::max(max_length_, sequence.size());
    names_[std::move(sequence)] = std::move(name);
}

EmojiTable EmojiTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open emoji map: " + path.string());
    EmojiTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("emoji map entry without tab", line_no);
        std::u32string seq;
        std::istringstream hexes(line.substr(0, tab));
        std::string hex;
        while (hexes >> hex) seq.push_back(static_cast<char32_t>(std::stoul(hex, nullptr, 16)));
        table.add(std::move(seq), line.substr(tab + 1));
    }
    return table;
}

std::size_t EmojiTable::match(std::u32string_view text, std::size_t pos, const std::string** name) const {
    if (pos >= text.size() || !first_codepoints_.count(text[pos])) return 0;
    std::size_t longest = std::min(max_length_, text.size() - pos);
    std::u32string key;
    for (std::size_t len = longest; len > 0; --len) {
        key.assign(text.substr(pos, len));
        if (auto it = names_.find(key); it != names_.end()) {
            *name = &it->second;
            return len;
        }
    }
    return 0;
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stopword list: " + path.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') words.insert(line);
    }
    return StopwordList(std::move(words));
}

const EmojiTable& default_emoji_table() {
    static const EmojiTable table = EmojiTable::load(data_file("emoji_cldr.tsv"));
    return table;
}

const StopwordList& stopword_list(const std::string& id) {
    static std::mutex mutex;
    static std::map<std::string, std::unique_ptr<StopwordList>> lists;
    std::lock_guard lock(mutex);
    auto& slot = lists[id];
    if (!slot) {
        if (id == "none") {
            slot = std::make_unique<StopwordList>();
        } else {
            slot = std::make_unique<StopwordList>(StopwordList::load(data_file("stopwords_" + id + ".txt")));
        }
    }
    return *slot;
}

// ---------------------------------------------------------------------------
// Normalization and tokenization

namespace {

std::u32string replace_emoji(std::u32string_view text, const EmojiTable& table, bool pad) {
    std::u32string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        const std::string* name = nullptr;
        if (std::size_t len = table.match(text, i, &name)) {
            if (pad) out.push_back(U' ');
            for (unsigned char c : *name) out.push_back(c);
            if (pad) out.push_back(U' ');
            i += len;
        } else {
            out.push_back(text[i++]);
        }
    }
    return out;
}

bool is_space(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || u_isUWhiteSpace(c); }

// Variation selectors and joiners left behind by unmapped emoji.
bool is_emoji_glue(char32_t c) { return c == 0xFE0E || c == 0xFE0F || c == 0x200D; }

}  // namespace

std::string normalize_emoji(std::string_view text, const EmojiTable& table) {
    return utf8_encode(replace_emoji(utf8_decode(text), table, false));
}

std::string normalize_emoji(std::string_view text) { return normalize_emoji(text, default_emoji_table()); }

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::u32string s = utf8_decode(text);
    if (config.emoji_to_cldr) {
        s = replace_emoji(s, default_emoji_table(), true);
        std::erase_if(s, is_emoji_glue);
    }
    if (config.lowercase) {
        for (auto& c : s) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
    }
    if (config.strip_punctuation) {
        std::u32string stripped(s);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!u_ispunct(static_cast<UChar32>(s[i]))) continue;
            bool intra_hyphen = s[i] == U'-' && i > 0 && i + 1 < s.size() && u_isalnum(static_cast<UChar32>(s[i - 1])) &&
                                u_isalnum(static_cast<UChar32>(s[i + 1]));
            if (!intra_hyphen) stripped[i] = U' ';
        }
        s = std::move(stripped);
    }

    const StopwordList* stopwords = config.remove_stopwords ? &stopword_list(config.stopword_list_id) : nullptr;
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (start == i) continue;
        std::string token = utf8_encode(std::u32string_view(s).substr(start, i - start));
        if (stopwords && stopwords->contains(token)) continue;
        if (config.stem) token = stem(token);
        tokens.push_back(std::move(token));
    }
    return tokens;
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char32_t c : utf8_decode(text)) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

}  // namespace clustval
