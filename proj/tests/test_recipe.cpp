#include <gtest/gtest.h>

#include "oscar/recipe.hpp"

using namespace oscar;

namespace {

Recipe recipe_with(std::vector<std::string> ingredients, std::vector<std::string> steps) {
  Recipe r;
  r.title = "test";
  for (auto& i : ingredients) r.ingredients.push_back({std::move(i), std::nullopt});
  r.steps = std::move(steps);
  return r;
}

std::vector<ObjectStatus> statuses_of(const std::string& step, std::vector<std::string> ingredients) {
  std::vector<Ingredient> ings;
  for (auto& i : ingredients) ings.push_back({std::move(i), std::nullopt});
  return extract_step_statuses(step, ings, VerbLexicon::builtin());
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(NormalizeRecipe, MixedMarkerStyles) {
  const auto r = normalize_recipe("Step 1: Chop onions.\n2. Heat oil.");
  EXPECT_EQ(r.steps, (std::vector<std::string>{"Chop onions.", "Heat oil."}));
}

TEST(NormalizeRecipe, StepDotAndParenMarkers) {
  const auto r = normalize_recipe("Step 1. Boil water\nStep 2 - Add pasta\n3) Drain");
  EXPECT_EQ(r.steps, (std::vector<std::string>{"Boil water", "Add pasta", "Drain"}));
}

TEST(NormalizeRecipe, InlineStepMarkersAreSplit) {
  const auto r = normalize_recipe("Step 1: Wash rice. Step 2: Cook rice.");
  EXPECT_EQ(r.steps, (std::vector<std::string>{"Wash rice.", "Cook rice."}));
}

TEST(NormalizeRecipe, UnmarkedLinesAreOneStepEach) {
  const auto r = normalize_recipe("Crack the eggs\n\nWhisk them\nFry");
  EXPECT_EQ(r.steps, (std::vector<std::string>{"Crack the eggs", "Whisk them", "Fry"}));
}

TEST(NormalizeRecipe, ContinuationLinesJoinPreviousMarkedStep) {
  const auto r = normalize_recipe("1. Mix flour\nand sugar\n2. Bake");
  EXPECT_EQ(r.steps, (std::vector<std::string>{"Mix flour and sugar", "Bake"}));
}

TEST(NormalizeRecipe, SectionsTitleAndIngredients) {
  const auto r = normalize_recipe(
      "Title: Toast\nIngredients:\n- 2 slices of bread\n- Butter, softened\nSteps:\n1. Toast the bread.\n"
      "2. Spread butter on it.");
  EXPECT_EQ(r.title, "Toast");
  ASSERT_EQ(r.ingredients.size(), 2u);
  EXPECT_EQ(r.ingredients[0].name, "bread");
  EXPECT_EQ(r.ingredients[0].quantity, "2 slices");
  EXPECT_EQ(r.ingredients[1].name, "butter");
  EXPECT_FALSE(r.ingredients[1].quantity.has_value());
  EXPECT_EQ(r.size(), 2);
}

TEST(NormalizeRecipe, NormalizedDocumentIsIdentity) {
  const auto r = recipe_with({"eggs"}, {"Whisk the eggs.", "Fry them."});
  EXPECT_EQ(normalize_recipe(nlohmann::json(r).dump()), r);
}

TEST(NormalizeRecipe, EmptyInput) {
  EXPECT_EQ(code_of([] { normalize_recipe(""); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { normalize_recipe("   \n\t"); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { normalize_recipe("Ingredients:\n- salt\n"); }), ErrorCode::EmptyInput);
}

TEST(NormalizeRecipe, IdempotentThroughRenderedText) {
  const std::vector<std::string> inputs{
      "Step 1: Chop onions.\n2. Heat oil.",
      "Title: Soup\nIngredients:\n- 3 carrots\nSteps:\nStep 1. Peel the carrots\nStep 2. Boil them",
      "Crack eggs\nWhisk\nFry",
  };
  for (const auto& in : inputs) {
    const auto once = normalize_recipe(in);
    EXPECT_EQ(normalize_recipe(to_text(once)), once) << in;
    EXPECT_EQ(normalize_recipe(nlohmann::json(once).dump()), once) << in;
  }
}

namespace {

class FixedNormalizer : public TextNormalizationProvider {
 public:
  explicit FixedNormalizer(Recipe r) : r_(std::move(r)) {}
  Recipe normalize(std::string_view) const override { return r_; }

 private:
  Recipe r_;
};

class FixedExtractor : public StatusExtractionProvider {
 public:
  explicit FixedExtractor(StepStatusMap m) : m_(std::move(m)) {}
  StepStatusMap extract(const Recipe&) const override { return m_; }

 private:
  StepStatusMap m_;
};

}  // namespace

TEST(NormalizeRecipe, ProviderOutputIsRevalidated) {
  FixedNormalizer good(recipe_with({}, {"A", "B"}));
  EXPECT_EQ(normalize_recipe("anything", &good).size(), 2);
  FixedNormalizer no_steps(recipe_with({}, {}));
  EXPECT_EQ(code_of([&] { normalize_recipe("anything", &no_steps); }), ErrorCode::ProviderViolation);
  FixedNormalizer blank_step(recipe_with({}, {"A", "  "}));
  EXPECT_EQ(code_of([&] { normalize_recipe("anything", &blank_step); }), ErrorCode::ProviderViolation);
}

TEST(ExtractStatuses, WhiskEggs) {
  EXPECT_EQ(statuses_of("Whisk the eggs in a bowl", {"eggs"}),
            (std::vector<ObjectStatus>{{"whisking", "eggs"}}));
}

TEST(ExtractStatuses, PronounChainsToNearestMention) {
  EXPECT_EQ(statuses_of("Peel the carrots, chop them, and store the carrots", {"carrots"}),
            (std::vector<ObjectStatus>{{"peeling", "carrots"}, {"chopping", "carrots"}, {"storing", "carrots"}}));
}

TEST(ExtractStatuses, NoObjectInteraction) { EXPECT_TRUE(statuses_of("Wait 10 minutes", {"eggs"}).empty()); }

TEST(ExtractStatuses, MultiplePairsPerStep) {
  EXPECT_EQ(statuses_of("Chop the onions and peel the garlic.", {"onions", "garlic"}),
            (std::vector<ObjectStatus>{{"chopping", "onions"}, {"peeling", "garlic"}}));
}

TEST(ExtractStatuses, VerbGovernsSeveralIngredients) {
  EXPECT_EQ(statuses_of("Dice the tomatoes and onions.", {"tomatoes", "onions"}),
            (std::vector<ObjectStatus>{{"dicing", "tomatoes"}, {"dicing", "onions"}}));
}

TEST(ExtractStatuses, SingularMentionMatchesPluralIngredient) {
  EXPECT_EQ(statuses_of("Slice each potato thinly", {"potatoes"}),
            (std::vector<ObjectStatus>{{"slicing", "potatoes"}}));
}

TEST(ExtractStatuses, LongestIngredientMatchWins) {
  EXPECT_EQ(statuses_of("Melt the butter, then add olive oil.", {"oil", "olive oil", "butter"}),
            (std::vector<ObjectStatus>{{"melting", "butter"}, {"adding", "olive oil"}}));
}

TEST(ExtractStatuses, SentenceBoundaryEndsVerbScope) {
  EXPECT_EQ(statuses_of("Boil the water. The rice goes in later.", {"water", "rice"}),
            (std::vector<ObjectStatus>{{"boiling", "water"}}));
}

TEST(ExtractStatuses, GerundSurfaceFormIsAccepted) {
  EXPECT_EQ(statuses_of("Keep stirring the sauce", {"sauce"}), (std::vector<ObjectStatus>{{"stirring", "sauce"}}));
}

TEST(ExtractStatuses, EmptyIngredientListFallsBackToFirstContentWord) {
  EXPECT_EQ(statuses_of("Chop the onions finely", {}), (std::vector<ObjectStatus>{{"chopping", "onions"}}));
  EXPECT_TRUE(statuses_of("Wait 10 minutes", {}).empty());
}

TEST(ExtractStatuses, RecipeLevelMapCoversEveryStep) {
  const auto r = recipe_with({"eggs", "butter"}, {"Whisk the eggs.", "Wait.", "Melt the butter."});
  const auto m = extract_object_statuses(r);
  EXPECT_EQ(m.entries().size(), 3u);
  EXPECT_EQ(m.at(1), (std::vector<ObjectStatus>{{"whisking", "eggs"}}));
  EXPECT_TRUE(m.at(2).empty());
  EXPECT_EQ(m.at(3), (std::vector<ObjectStatus>{{"melting", "butter"}}));
}

TEST(ExtractStatuses, DeterministicAndNounsGrounded) {
  const auto r = normalize_recipe(
      "Ingredients:\n- 3 carrots\n- 2 onions\n- 1 cup rice\n- salt\nSteps:\n"
      "1. Peel the carrots, chop them, and store the carrots\n2. Dice the onions and fry them in oil\n"
      "3. Rinse the rice until the water runs clear\n4. Season with salt and stir\n5. Serve");
  const auto a = extract_object_statuses(r);
  const auto b = extract_object_statuses(r);
  EXPECT_EQ(a, b);
  for (const auto& [step, list] : a.entries())
    for (const auto& s : list) {
      EXPECT_TRUE(is_gerund(s.verb)) << s.verb;
      bool grounded = text::lower(r.step(step)).find(s.noun) != std::string::npos;
      for (const auto& ing : r.ingredients) grounded = grounded || ing.name == s.noun;
      EXPECT_TRUE(grounded) << s.phrase();
    }
}

TEST(ExtractStatuses, ProviderOutputIsRevalidated) {
  const auto r = recipe_with({"eggs"}, {"Whisk the eggs."});
  StepStatusMap ok;
  ok.set(1, {{"whisking", "eggs"}});
  FixedExtractor good(ok);
  EXPECT_EQ(extract_object_statuses(r, &good), ok);

  StepStatusMap bad_step;
  bad_step.set(2, {{"whisking", "eggs"}});
  FixedExtractor out_of_range(bad_step);
  EXPECT_EQ(code_of([&] { extract_object_statuses(r, &out_of_range); }), ErrorCode::ProviderViolation);

  StepStatusMap bad_verb;
  bad_verb.set(1, {{"whisk", "eggs"}});
  FixedExtractor not_gerund(bad_verb);
  EXPECT_EQ(code_of([&] { extract_object_statuses(r, &not_gerund); }), ErrorCode::ProviderViolation);

  StepStatusMap bad_noun;
  bad_noun.set(1, {{"whisking", "flour"}});
  FixedExtractor ungrounded(bad_noun);
  EXPECT_EQ(code_of([&] { extract_object_statuses(r, &ungrounded); }), ErrorCode::ProviderViolation);
}

TEST(VerbLexicon, BuiltinCoversCommonVerbs) {
  const auto& lex = VerbLexicon::builtin();
  EXPECT_GE(lex.size(), 200u);
  EXPECT_EQ(lex.gerund("chop"), "chopping");
  EXPECT_EQ(lex.gerund("chopping"), "chopping");
  EXPECT_EQ(lex.gerund("bake"), "baking");
  EXPECT_FALSE(lex.gerund("wait").has_value());
}

TEST(VerbLexicon, ParseSkipsCommentsAndBlankLines) {
  const auto lex = VerbLexicon::parse("# comment\n\nroll rolling\nbad\n");
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.gerund("roll"), "rolling");
}

TEST(RecipeJson, RoundTrip) {
  Recipe r = recipe_with({"eggs"}, {"Whisk the eggs."});
  r.ingredients[0].quantity = "2";
  EXPECT_EQ(nlohmann::json(r).get<Recipe>(), r);
  StepStatusMap m = extract_object_statuses(r);
  EXPECT_EQ(nlohmann::json(m).get<StepStatusMap>(), m);
}
