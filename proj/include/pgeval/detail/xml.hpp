#pragma once

// Minimal non-validating XML tokenizer, enough for OSM exports. Reports the
// byte offset of the first well-formedness error.

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgeval/error.hpp"

namespace pgeval::detail {

struct XmlAttribute {
    std::string name;
    std::string value;
};

struct XmlStartTag {
    std::string_view name;
    std::vector<XmlAttribute> attributes;
    std::size_t offset = 0;
    bool self_closing = false;

    [[nodiscard]] const std::string* find(std::string_view key) const noexcept {
        for (const auto& a : attributes)
            if (a.name == key) return &a.value;
        return nullptr;
    }
};

class XmlScanner {
public:
    explicit XmlScanner(std::string_view doc) : doc_(doc) {}

    /// Walks the document, calling on_start(const XmlStartTag&) for every
    /// element and on_end(std::string_view name) when it closes.
    template <class OnStart, class OnEnd>
    void run(OnStart&& on_start, OnEnd&& on_end) {
        std::vector<std::string_view> stack;
        bool seen_root = false;
        while (pos_ < doc_.size()) {
            if (doc_[pos_] != '<') {
                const std::size_t text_at = pos_;
                while (pos_ < doc_.size() && doc_[pos_] != '<') {
                    if (doc_[pos_] == '&') skip_entity();
                    else ++pos_;
                }
                if (stack.empty() && !only_space(doc_.substr(text_at, pos_ - text_at)))
                    fail("text outside the root element", text_at);
                continue;
            }
            const std::size_t at = pos_;
            if (starts_with("<?")) {
                skip_past("?>", "unterminated processing instruction");
            } else if (starts_with("<!--")) {
                skip_past("-->", "unterminated comment");
            } else if (starts_with("<![CDATA[")) {
                if (stack.empty()) fail("CDATA outside the root element", at);
                skip_past("]]>", "unterminated CDATA section");
            } else if (starts_with("<!")) {
                skip_declaration();
            } else if (starts_with("</")) {
                pos_ += 2;
                const std::string_view name = read_name();
                skip_space();
                expect('>');
                if (stack.empty() || stack.back() != name)
                    fail("mismatched closing tag </" + std::string(name) + ">", at);
                stack.pop_back();
                on_end(name);
            } else {
                ++pos_;
                XmlStartTag tag;
                tag.offset = at;
                tag.name = read_name();
                read_attributes(tag);
                if (stack.empty()) {
                    if (seen_root) fail("second root element", at);
                    seen_root = true;
                }
                on_start(std::as_const(tag));
                if (tag.self_closing) on_end(tag.name);
                else stack.push_back(tag.name);
            }
        }
        if (!stack.empty()) fail("unclosed element <" + std::string(stack.back()) + ">", doc_.size());
        if (!seen_root) fail("no root element", doc_.size());
    }

private:
    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        throw ParseError("malformed XML: " + what, at);
    }

    [[nodiscard]] bool starts_with(std::string_view s) const noexcept {
        return doc_.substr(pos_, s.size()) == s;
    }

    static bool only_space(std::string_view s) noexcept {
        for (char c : s)
            if (!std::isspace(static_cast<unsigned char>(c))) return false;
        return true;
    }

    void skip_space() noexcept {
        while (pos_ < doc_.size() && std::isspace(static_cast<unsigned char>(doc_[pos_]))) ++pos_;
    }

    void skip_past(std::string_view terminator, const char* what) {
        const std::size_t at = pos_;
        const std::size_t end = doc_.find(terminator, pos_ + 2);
        if (end == std::string_view::npos) fail(what, at);
        pos_ = end + terminator.size();
    }

    void skip_declaration() {
        // <!DOCTYPE ...> possibly with an internal [ ... ] subset
        const std::size_t at = pos_;
        int bracket = 0;
        for (pos_ += 2; pos_ < doc_.size(); ++pos_) {
            const char c = doc_[pos_];
            if (c == '[') ++bracket;
            else if (c == ']') --bracket;
            else if (c == '>' && bracket <= 0) {
                ++pos_;
                return;
            }
        }
        fail("unterminated declaration", at);
    }

    void expect(char c) {
        if (pos_ >= doc_.size() || doc_[pos_] != c) fail(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    static bool name_char(char c) noexcept {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.' ||
               static_cast<unsigned char>(c) >= 0x80;
    }

    std::string_view read_name() {
        const std::size_t start = pos_;
        if (pos_ >= doc_.size() || !name_char(doc_[pos_]) || doc_[pos_] == '-' || doc_[pos_] == '.' ||
            std::isdigit(static_cast<unsigned char>(doc_[pos_])))
            fail("expected a name", pos_);
        while (pos_ < doc_.size() && name_char(doc_[pos_])) ++pos_;
        return doc_.substr(start, pos_ - start);
    }

    void read_attributes(XmlStartTag& tag) {
        for (;;) {
            const std::size_t before = pos_;
            skip_space();
            if (pos_ >= doc_.size()) fail("unterminated start tag", tag.offset);
            if (doc_[pos_] == '>') {
                ++pos_;
                return;
            }
            if (starts_with("/>")) {
                pos_ += 2;
                tag.self_closing = true;
                return;
            }
            if (pos_ == before) fail("expected whitespace before attribute", pos_);
            XmlAttribute attr;
            attr.name = std::string(read_name());
            skip_space();
            expect('=');
            skip_space();
            if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\''))
                fail("expected quoted attribute value", pos_);
            const char quote = doc_[pos_++];
            while (pos_ < doc_.size() && doc_[pos_] != quote) {
                if (doc_[pos_] == '<') fail("'<' inside attribute value", pos_);
                if (doc_[pos_] == '&') {
                    attr.value += decode_entity();
                } else {
                    attr.value += doc_[pos_++];
                }
            }
            if (pos_ >= doc_.size()) fail("unterminated attribute value", tag.offset);
            ++pos_;
            for (const auto& a : tag.attributes)
                if (a.name == attr.name) fail("duplicate attribute '" + attr.name + "'", before);
            tag.attributes.push_back(std::move(attr));
        }
    }

    void skip_entity() { (void)decode_entity(); }

    std::string decode_entity() {
        const std::size_t at = pos_;
        const std::size_t semi = doc_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 12) fail("bad entity reference", at);
        const std::string_view ent = doc_.substr(pos_ + 1, semi - pos_ - 1);
        pos_ = semi + 1;
        if (ent == "amp") return "&";
        if (ent == "lt") return "<";
        if (ent == "gt") return ">";
        if (ent == "quot") return "\"";
        if (ent == "apos") return "'";
        if (ent.size() >= 2 && ent[0] == '#') {
            std::uint32_t cp = 0;
            const bool hex = ent[1] == 'x' || ent[1] == 'X';
            const std::string_view digits = ent.substr(hex ? 2 : 1);
            if (digits.empty()) fail("bad character reference", at);
            for (char c : digits) {
                int v;
                if (c >= '0' && c <= '9') v = c - '0';
                else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
                else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
                else fail("bad character reference", at);
                cp = cp * (hex ? 16u : 10u) + static_cast<std::uint32_t>(v);
                if (cp > 0x10FFFF) fail("bad character reference", at);
            }
            return utf8(cp);
        }
        fail("unknown entity '&" + std::string(ent) + ";'", at);
    }

    static std::string utf8(std::uint32_t cp) {
        std::string s;
        if (cp < 0x80) {
            s += static_cast<char>(cp);
        } else if (cp < 0x800) {
            s += static_cast<char>(0xC0 | (cp >> 6));
            s += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            s += static_cast<char>(0xE0 | (cp >> 12));
            s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            s += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            s += static_cast<char>(0xF0 | (cp >> 18));
            s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            s += static_cast<char>(0x80 | (cp & 0x3F));
        }
        return s;
    }

    std::string_view doc_;
    std::size_t pos_ = 0;
};

} // namespace pgeval::detail
