#pragma once

// Machine-parsable action and prediction blocks.
//
// Actions travel in a fenced block:
//
//   ```action
//   attack Reese=2
//   attack Wren=1
//   ```
//
// One grammar per game:
//   survivor   `hold` | one or more `attack <name>=<ammo>` lines
//   tragedy    `extract=<tonnes>`
//   coalition  `pass` | `accept=<proposal id>` | `propose` followed by `member <name>=<share>` lines
//   scheduler  `option=<index>`
//   hupi       `bid=<integer>`
//
// Predictions use a ```prediction block with one line:
//   survivor `target=<name|none>`, tragedy `extract=<x>`, coalition
//   `stance=<propose|accept|pass>`, scheduler `option=<i>`, hupi `bid=<b>`.

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "arena/games.hpp"

namespace arena::grammar {

std::string format_number(double v);

std::string render_action(const games::GameAction& action, std::span<const std::string> names);
std::string render_action_block(const games::GameAction& action, std::span<const std::string> names);

// Parses the first ```action block in `text` (or the bare text if no fence is
// present). On failure returns nullopt and describes the problem in `error`.
std::optional<games::GameAction> parse_action(std::string_view text, GameKind kind,
                                              std::span<const std::string> names,
                                              std::string* error = nullptr);

std::string render_prediction(const games::PredictionPayload& payload,
                              std::span<const std::string> names);
std::string render_prediction_block(const games::PredictionPayload& payload,
                                    std::span<const std::string> names);
std::optional<games::PredictionPayload> parse_prediction(std::string_view text, GameKind kind,
                                                         std::span<const std::string> names,
                                                         std::string* error = nullptr);

// Text outside the first fenced block, trimmed.
std::string strip_block(std::string_view text, std::string_view tag);

// Human-readable grammar description for prompts.
std::string action_grammar(GameKind kind);
std::string prediction_grammar(GameKind kind);

}  // namespace arena::grammar
