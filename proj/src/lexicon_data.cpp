#include "asag/gaming.hpp"

namespace asag::gaming {

const std::unordered_set<std::string>& default_stop_words() {
    static const std::unordered_set<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
        "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing",
        "down", "during", "each", "few", "for", "from", "further", "had", "has", "have",
        "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
        "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
        "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off",
        "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over",
        "own", "same", "she", "should", "so", "some", "such", "than", "that", "the",
        "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
        "through", "to", "too", "under", "until", "up", "very", "was", "we", "were",
        "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
        "would", "you", "your", "yours", "yourself", "yourselves", "s", "t", "also", "shows",
    };
    return words;
}

const std::unordered_set<std::string>& default_medical_terms() {
    static const std::unordered_set<std::string> terms = {
        "abdominal", "abscess", "acute", "anemia", "ankle", "antibiotic", "anxiety", "aortic",
        "arrhythmia", "arthritis", "ascites", "asthma", "ataxia", "atrial", "auscultation",
        "back", "bilirubin", "biopsy", "bleeding", "blood", "bone", "bowel", "bradycardia",
        "breath", "bruising", "cardiac", "chest", "chills", "cholesterol", "chronic", "cirrhosis",
        "confusion", "constipation", "cough", "crackles", "creatinine", "cyanosis", "dehydration",
        "diarrhea", "diaphoresis", "distal", "dizziness", "dysphagia", "dyspnea", "dysuria",
        "ecg", "edema", "effusion", "electrolytes", "emergency", "erythema", "extremities",
        "fatigue", "fever", "fingers", "flexion", "fracture", "glucose", "headache", "heart",
        "hematuria", "hemoglobin", "hemoptysis", "hepatomegaly", "hypertension", "hypotension",
        "hypoxia", "infection", "infiltrate", "insomnia", "jaundice", "joint", "kidney", "legs",
        "lesion", "leukocytosis", "liver", "lung", "lymphadenopathy", "malaise", "murmur",
        "muscle", "nausea", "neck", "numbness", "oximetry", "oxygen", "pain", "pallor",
        "palpitations", "paralysis", "platelets", "pneumonia", "polyuria", "proximal", "pulse",
        "rash", "reflexes", "renal", "respirations", "respiratory", "saturation", "seizure",
        "sensation", "sepsis", "serum", "shortness", "sodium", "sputum", "stiffness", "stool",
        "swelling", "syncope", "tachycardia", "temperature", "tendon", "tenderness", "thirst",
        "tingling", "toes", "tremor", "ulcer", "urine", "vomiting", "weakness", "wheezing",
        "weight", "x-ray", "polyneuropathy", "syndrome", "insulin", "thyroid", "sweating",
        "photophobia", "nuchal", "rigidity", "petechiae", "hemolysis", "sleepiness", "snoring",
        "pruritus", "urticaria", "hoarseness", "claudication", "paresthesia", "vertigo",
        "tinnitus", "polydipsia", "hyperglycemia", "ketones", "lipase", "amylase", "troponin",
        "goiter", "exophthalmos", "hyperreflexia", "hyporeflexia", "myalgia", "arthralgia",
    };
    return terms;
}

Lexicons default_lexicons() {
    return Lexicons{default_stop_words(), default_medical_terms()};
}

}  // namespace asag::gaming
