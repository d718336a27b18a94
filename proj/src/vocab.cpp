#include "specrej/vocab.hpp"

#include <cctype>
#include <stdexcept>

namespace specrej {

Vocabulary::Vocabulary() {
    intern(kUnk);
    intern(kEos);
}

TokenId Vocabulary::intern(std::string_view token) {
    auto it = ids_.find(std::string(token));
    if (it != ids_.end()) return it->second;
    TokenId id = static_cast<TokenId>(tokens_.size());
    tokens_.emplace_back(token);
    ids_.emplace(tokens_.back(), id);
    return id;
}

TokenId Vocabulary::lookup(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? unk_id() : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
    if (id >= tokens_.size()) throw std::out_of_range("unknown token id");
    return tokens_[id];
}

bool Vocabulary::contains(std::string_view token) const {
    return ids_.find(std::string(token)) != ids_.end();
}

std::vector<std::string> Vocabulary::split(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) {
    std::vector<TokenId> out;
    for (const auto& w : split(text)) out.push_back(intern(w));
    return out;
}

std::vector<TokenId> Vocabulary::encode_const(std::string_view text) const {
    std::vector<TokenId> out;
    for (const auto& w : split(text)) out.push_back(lookup(w));
    return out;
}

std::string Vocabulary::decode(const std::vector<TokenId>& ids) const {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ' ';
        out += token(ids[i]);
    }
    return out;
}

} // namespace specrej
