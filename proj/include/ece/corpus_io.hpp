#pragma once

// JSONL corpus files: one post per line.
//
//   {"thread_id":"t01","post_index":0,"author_id":"a7","label_a":"factual",
//    "label_b":"factual","text":"..."}
//
// Lines may come in any order; threads are sorted by thread_id and posts by
// post_index on load.

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ece/corpus.hpp"

namespace ece {

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

inline Sentiment require_label(const nlohmann::json& obj, const char* key, std::size_t line) {
    const std::string value = require_string(obj, key, line);
    auto s = parse_sentiment(value);
    if (!s) throw ParseError(line, std::string("unknown label '") + value + "' in '" + key + "'");
    return *s;
}

}  // namespace detail

inline Corpus parse_corpus(std::istream& in) {
    static const std::set<std::string> known = {"thread_id", "post_index", "author_id",
                                                "label_a",   "label_b",    "text"};
    std::map<std::string, std::map<std::size_t, Post>> grouped;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
        for (const auto& [key, value] : obj.items())
            if (!known.contains(key)) throw ParseError(line, "unknown field '" + key + "'");

        Post post;
        post.thread_id = detail::require_string(obj, "thread_id", line);
        auto idx = obj.find("post_index");
        if (idx == obj.end()) throw ParseError(line, "missing field 'post_index'");
        if (!idx->is_number_integer() || idx->get<long long>() < 0)
            throw ParseError(line, "field 'post_index' must be a non-negative integer");
        post.index = idx->get<std::size_t>();
        post.author_id = detail::require_string(obj, "author_id", line);
        post.annotations.label_a = detail::require_label(obj, "label_a", line);
        post.annotations.label_b = detail::require_label(obj, "label_b", line);
        if (auto t = obj.find("text"); t != obj.end()) {
            if (!t->is_string()) throw ParseError(line, "field 'text' must be a string");
            post.text = t->get<std::string>();
        }
        auto& thread = grouped[post.thread_id];
        if (thread.contains(post.index))
            throw ValidationError("thread '" + post.thread_id + "': duplicate post_index " +
                                  std::to_string(post.index) + " (line " + std::to_string(line) +
                                  ")");
        thread.emplace(post.index, std::move(post));
    }

    Corpus corpus;
    for (auto& [id, posts] : grouped) {
        Thread thread{id, {}};
        for (auto& [index, post] : posts) thread.posts.push_back(std::move(post));
        corpus.threads.push_back(std::move(thread));
    }
    validate(corpus);
    return corpus;
}

inline Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
    return parse_corpus(in);
}

/// Writes threads in sorted thread_id order so that load(write(c)) == c for any
/// loaded corpus.
inline void write_corpus(std::ostream& out, const Corpus& corpus) {
    std::vector<const Thread*> order;
    for (const auto& t : corpus.threads) order.push_back(&t);
    std::sort(order.begin(), order.end(),
              [](const Thread* a, const Thread* b) { return a->thread_id < b->thread_id; });
    for (const Thread* thread : order) {
        for (const Post& post : thread->posts) {
            nlohmann::ordered_json obj;
            obj["thread_id"] = post.thread_id;
            obj["post_index"] = post.index;
            obj["author_id"] = post.author_id;
            obj["label_a"] = std::string(to_string(post.annotations.label_a));
            obj["label_b"] = std::string(to_string(post.annotations.label_b));
            if (post.text) obj["text"] = *post.text;
            out << obj.dump() << '\n';
        }
    }
}

inline void save_corpus(const std::string& path, const Corpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorpusError("cannot write corpus file '" + path + "'");
    write_corpus(out, corpus);
}

inline std::string corpus_to_string(const Corpus& corpus) {
    std::ostringstream out;
    write_corpus(out, corpus);
    return out.str();
}

}  // namespace ece
