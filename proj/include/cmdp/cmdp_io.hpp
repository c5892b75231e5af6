/*
 Copyright 2026 The cmdp-forge Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Plain-text CMDP documents.
//
// Grammar (line oriented, '#' starts a comment, blank lines ignored):
//
//   document  := { scalar } { section }
//   scalar    := key "=" number            key in s0, horizon, discount, budget.<k>
//   section   := "[states]"     { "count = " int | "absorbing =" { int } }
//              | "[actions]"    { "count = " int | "unavailable =" { int ":" int } }
//              | "[transition]" { int int int number }     s a next probability
//              | "[reward]"     { int int number }         s a reward
//              | "[cost.<k>]"   { int number }             s cost
//
// Scalars may also appear between sections. Missing reward and cost entries
// are zero. Numbers are decimal; the writer emits the shortest representation
// that reads back to the same double, so documents round-trip bit-exactly.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cmdp/cmdp.hpp"

namespace cmdp {

class ParseError : public Error {
public:
    ParseError(int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_;
};

Cmdp read_cmdp(std::string_view text);
std::string write_cmdp(const Cmdp& m);

Cmdp load_cmdp(const std::filesystem::path& path);
void save_cmdp(const std::filesystem::path& path, const Cmdp& m);

} // namespace cmdp
