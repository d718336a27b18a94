#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace specrej {

using TokenId = std::uint32_t;

/// Token table shared by every model in a run.  Ids are dense and assigned in
/// first-appearance order; <unk> and <eos> are always present, so a trained
/// vocabulary never has fewer than two entries.
class Vocabulary {
public:
    static constexpr std::string_view kUnk = "<unk>";
    static constexpr std::string_view kEos = "<eos>";

    Vocabulary();

    /// Returns the id for `token`, adding it if unseen.
    TokenId intern(std::string_view token);

    /// Returns the id for `token`, or the <unk> id if unseen.  Never inserts.
    TokenId lookup(std::string_view token) const;

    /// Inverse mapping.  Throws std::out_of_range("unknown token id") when
    /// `id` was never assigned.
    const std::string& token(TokenId id) const;

    bool contains(std::string_view token) const;
    std::size_t size() const { return tokens_.size(); }

    TokenId unk_id() const { return 0; }
    TokenId eos_id() const { return 1; }

    /// Whitespace split; every run of non-space bytes is one token.
    static std::vector<std::string> split(std::string_view text);

    /// split + intern each piece.
    std::vector<TokenId> encode(std::string_view text);
    /// split + lookup each piece (unseen words map to <unk>).
    std::vector<TokenId> encode_const(std::string_view text) const;
    /// Space-joined token strings; <eos> is rendered like any other token.
    std::string decode(const std::vector<TokenId>& ids) const;

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

} // namespace specrej
