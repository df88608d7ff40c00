/** Per-category labeling criteria shown alongside every task. */

export interface GuidelineEntry {
  category: string;
  label: string;
  truePositive: string;
  falsePositive: string;
  unclear: string;
}

export const GUIDELINES: GuidelineEntry[] = [
  {
    category: "Allergen",
    label: "Allergen",
    truePositive:
      "The term names a food, ingredient, or animal someone could be allergic to; no reaction needs to be mentioned.",
    falsePositive: "Used as a color, a name (person, pet, brand, place), a toy, or decor.",
    unclear: "Too little context to tell which sense is meant.",
  },
  {
    category: "Drug",
    label: "Drug",
    truePositive: "The term refers to a medicine or chemical compound as such.",
    falsePositive: "Used as a metaphor, a song/brand/person name, or other unrelated sense.",
    unclear: "Mentioned without enough context to pin the sense down.",
  },
  {
    category: "MedicalTerm",
    label: "Medical Term",
    truePositive:
      "The term expresses a health state, symptom, or condition of the poster or someone discussed.",
    falsePositive:
      "Everyday sense instead: weather, popularity, mood slang, music styles, and the like.",
    unclear: "Cannot decide between the clinical and everyday sense from the text.",
  },
  {
    category: "NaturalProduct",
    label: "Natural Product",
    truePositive: "The term denotes a plant or plant-derived product.",
    falsePositive: "A person's name, a color, a place, or ornament.",
    unclear: "Ambiguous between the plant and another sense.",
  },
];
