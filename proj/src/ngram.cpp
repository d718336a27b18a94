#include "specrej/ngram.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace specrej {

NGramModel::NGramModel(Vocabulary vocab, std::uint32_t order, double smoothing)
    : vocab_(std::move(vocab)), order_(order), smoothing_(smoothing) {
    if (order_ == 0) throw std::invalid_argument("invalid order");
    if (!(smoothing_ > 0.0)) throw std::invalid_argument("invalid smoothing");
}

void NGramModel::add_document(std::span<const TokenId> doc) {
    for (TokenId t : doc)
        if (t >= vocab_.size()) throw std::out_of_range("unknown token id");
    const std::size_t max_ctx = order_ - 1;
    std::vector<TokenId> ctx;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::size_t longest = std::min<std::size_t>(max_ctx, i);
        for (std::size_t len = 0; len <= longest; ++len) {
            ctx.assign(doc.begin() + (i - len), doc.begin() + i);
            Row& row = counts_[ctx];
            ++row.by_token[doc[i]];
            ++row.total;
        }
    }
}

const NGramModel::Row* NGramModel::find_backoff_row(std::span<const TokenId> context) const {
    const std::size_t max_ctx = std::min<std::size_t>(order_ - 1, context.size());
    std::vector<TokenId> key;
    for (std::size_t len = max_ctx; len > 0; --len) {
        key.assign(context.end() - len, context.end());
        auto it = counts_.find(key);
        if (it != counts_.end() && it->second.total > 0) return &it->second;
    }
    auto it = counts_.find(std::vector<TokenId>{});
    if (it != counts_.end() && it->second.total > 0) return &it->second;
    return nullptr;  // untrained model
}

std::vector<double> NGramModel::dist_for_context(std::span<const TokenId> context) const {
    for (TokenId t : context)
        if (t >= vocab_.size()) throw std::out_of_range("unknown token id");
    const std::size_t v = vocab_.size();
    const Row* row = find_backoff_row(context);
    const double total = row ? static_cast<double>(row->total) : 0.0;
    const double denom = total + smoothing_ * static_cast<double>(v);
    std::vector<double> dist(v, smoothing_ / denom);
    if (row)
        for (const auto& [tok, cnt] : row->by_token)
            dist[tok] = (static_cast<double>(cnt) + smoothing_) / denom;
    return dist;
}

std::vector<double> NGramModel::next_token_dist(std::span<const TokenId> prompt,
                                                std::span<const TokenId> generated,
                                                std::uint32_t /*stream*/) const {
    const std::size_t need = order_ - 1;
    std::vector<TokenId> ctx;
    ctx.reserve(std::min(need, prompt.size() + generated.size()));
    if (generated.size() >= need) {
        ctx.assign(generated.end() - need, generated.end());
    } else {
        const std::size_t from_prompt = std::min(need - generated.size(), prompt.size());
        ctx.assign(prompt.end() - from_prompt, prompt.end());
        ctx.insert(ctx.end(), generated.begin(), generated.end());
    }
    return dist_for_context(ctx);
}

void NGramModel::save(std::ostream& out) const {
    out << "specrej-ngram v1\n";
    out << "order " << order_ << "\n";
    std::ostringstream sm;
    sm << std::hexfloat << smoothing_;
    out << "smoothing " << sm.str() << "\n";
    out << "vocab " << vocab_.size() << "\n";
    for (TokenId id = 0; id < vocab_.size(); ++id) out << vocab_.token(id) << "\n";
    out << "rows " << counts_.size() << "\n";
    for (const auto& [ctx, row] : counts_) {
        out << ctx.size();
        for (TokenId t : ctx) out << ' ' << t;
        out << ' ' << row.by_token.size();
        for (const auto& [tok, cnt] : row.by_token) out << ' ' << tok << ' ' << cnt;
        out << "\n";
    }
}

namespace {

void expect_word(std::istream& in, const char* word) {
    std::string got;
    if (!(in >> got) || got != word)
        throw std::runtime_error(std::string("bad model file: expected '") + word + "'");
}

} // namespace

NGramModel NGramModel::load(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "specrej-ngram" || version != "v1")
        throw std::runtime_error("bad model file: unrecognized header");

    expect_word(in, "order");
    std::uint32_t order = 0;
    in >> order;

    expect_word(in, "smoothing");
    std::string sm_text;
    in >> sm_text;
    double smoothing = std::strtod(sm_text.c_str(), nullptr);

    expect_word(in, "vocab");
    std::size_t vsize = 0;
    in >> vsize;
    Vocabulary vocab;
    for (std::size_t i = 0; i < vsize; ++i) {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("bad model file: truncated vocab");
        if (i < 2) {
            // <unk>/<eos> are created by the Vocabulary itself; verify order.
            if (tok != vocab.token(static_cast<TokenId>(i)))
                throw std::runtime_error("bad model file: reserved tokens out of place");
        } else {
            vocab.intern(tok);
        }
    }

    NGramModel model(std::move(vocab), order, smoothing);

    expect_word(in, "rows");
    std::uint64_t nrows = 0;
    in >> nrows;
    for (std::uint64_t r = 0; r < nrows; ++r) {
        std::size_t ctx_len = 0;
        if (!(in >> ctx_len)) throw std::runtime_error("bad model file: truncated rows");
        std::vector<TokenId> ctx(ctx_len);
        for (auto& t : ctx) in >> t;
        std::size_t entries = 0;
        in >> entries;
        Row row;
        for (std::size_t e = 0; e < entries; ++e) {
            TokenId tok = 0;
            std::uint64_t cnt = 0;
            if (!(in >> tok >> cnt)) throw std::runtime_error("bad model file: truncated row");
            row.by_token[tok] = cnt;
            row.total += cnt;
        }
        model.counts_.emplace(std::move(ctx), std::move(row));
    }
    if (!in) throw std::runtime_error("bad model file: truncated");
    return model;
}

NGramModel train_ngram(const std::vector<std::vector<TokenId>>& corpus,
                       const Vocabulary& vocab, std::uint32_t order, double smoothing) {
    if (order == 0) throw std::invalid_argument("invalid order");
    if (!(smoothing > 0.0)) throw std::invalid_argument("invalid smoothing");
    bool any = false;
    for (const auto& doc : corpus)
        if (!doc.empty()) { any = true; break; }
    if (!any) throw std::invalid_argument("empty corpus");

    NGramModel model(vocab, order, smoothing);
    for (const auto& doc : corpus)
        if (!doc.empty()) model.add_document(doc);
    return model;
}

NGramModel train_ngram_text(const std::vector<std::string>& lines,
                            std::uint32_t order, double smoothing) {
    Vocabulary vocab;
    std::vector<std::vector<TokenId>> corpus;
    for (const auto& line : lines) {
        auto ids = vocab.encode(line);
        if (ids.empty()) continue;
        ids.push_back(vocab.eos_id());
        corpus.push_back(std::move(ids));
    }
    return train_ngram(corpus, vocab, order, smoothing);
}

} // namespace specrej
